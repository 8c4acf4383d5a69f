"""Gate-level simulation of fanout and bucket-brigade quantum RAM addressing."""
from .bucket import BucketCallReport, bb_call, bb_step_count, load_index, unload_index
from .fanout import FanoutCallReport, binary_to_unary, fanout_call, fanout_gate_counts, unary_to_binary
from .classical import ActivationTrace, elements_2d, simulate
from .noise import NoiseModel, analytic_error, error_scaling_table, monte_carlo_failure
from .oracle import MemoryArray, ideal_qram_oracle, load_memory, memory_from_pattern
from .qstate import (
    ONE,
    WAIT,
    ZERO,
    Bus,
    Configuration,
    QuantumState,
    dump_state,
    fidelity,
    make_address_state,
    schmidt_rank,
)

__version__ = "0.1.0"
