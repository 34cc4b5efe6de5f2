"""taxalign: align a sense taxonomy to a concept taxonomy by relaxation labeling.

The pipeline: load both hierarchies, derive candidate connections through a
bilingual word dictionary, then iteratively reweight each node's candidates
by the structural support of already-weighted neighbouring connections
until the assignment stabilizes.
"""

__version__ = "0.1.0"

from .candidates import (BilingualDict, CandidateSet, ConnectionStats, connection_stats,
                         generate_candidates, load_dict, normalize_word)
from .constraints import (Connection, ConstraintPack, ConstraintRule, Direction, Scope,
                          expand_pack, parse_constraint, support, supporters)
from .errors import (ConstraintFormatError, CycleError, DanglingEdgeError,
                     DuplicateNodeError, ParseError, TaxAlignError, UnknownNodeError)
from .evaluation import (EvalReport, GoldEntry, GoldStandard, baseline_random,
                         build_report, coverage, load_gold, precision, render_report)
from .relaxation import (Mapping, MappingEntry, RelaxConfig, RelaxResult, RelaxTrace,
                         RelaxationEngine, WeightTable, cost_estimate, init_weights,
                         run, select_mapping, update_rule)
from .taxonomy import (ClosureIndex, TaxNode, TaxonomyGraph, add_virtual_top,
                       build_closure, collapse_sense_siblings, dump_taxonomy,
                       load_taxonomy)

__all__ = [
    "__version__",
    "BilingualDict", "CandidateSet", "ConnectionStats", "connection_stats",
    "generate_candidates", "load_dict", "normalize_word",
    "Connection", "ConstraintPack", "ConstraintRule", "Direction", "Scope",
    "expand_pack", "parse_constraint", "support", "supporters",
    "ConstraintFormatError", "CycleError", "DanglingEdgeError", "DuplicateNodeError",
    "ParseError", "TaxAlignError", "UnknownNodeError",
    "EvalReport", "GoldEntry", "GoldStandard", "baseline_random", "build_report",
    "coverage", "load_gold", "precision", "render_report",
    "Mapping", "MappingEntry", "RelaxConfig", "RelaxResult", "RelaxTrace",
    "RelaxationEngine", "WeightTable", "cost_estimate", "init_weights", "run",
    "select_mapping", "update_rule",
    "ClosureIndex", "TaxNode", "TaxonomyGraph", "add_virtual_top", "build_closure",
    "collapse_sense_siblings", "dump_taxonomy", "load_taxonomy",
]
