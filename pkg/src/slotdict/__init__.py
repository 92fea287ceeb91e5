"""Slot-model dictionaries with lazy multi-level sorting, and probe accounting tools."""
from .baselines import EagerSortedDict, LinearProbeDict
from .bloomier import BloomierEncoding, BloomierError
from .bloomier import build as build_bloomier
from .kv_reduction import ReducedKeyDict
from .lazysort import (BudgetError, Checkpoint, DictError, KeyAbsent, KeyPresent, LazySortDict, LevelPlan,
                       decode_checkpoint, encode_checkpoint, plan_levels)
from .mathkit import (IterLogTable, SubsetRank, ceil_log2_binom, iter_log, log_binomial, log_star, subset_rank,
                      subset_unrank)
from .slot_model import AccessTrace, CellMemory, ProbeTrace, SlotArray, Trace
from .transfer_tree import TreeSpec, assign_costs, build_spec, probe_per_node
from .workload import OperationSequence, deserialize, generate, serialize

__version__ = "0.1.0"
