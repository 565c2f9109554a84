"""Characterize non-robust inputs of a multi-class traffic shaper.

The pipeline simulates per-class quality, scores inputs with a
priority-preserving robustness measure, and learns input ranges that predict
non-robustness with the ENRICH loop (adaptive random testing, regression
trees and range reduction).
"""

from .errors import InputError
from .evaluation import (LabelledTestSet, MetricsReport, build_labelled_testset,
                         classify_with_ranges, metrics, range_swing,
                         run_combinations)
from .loop import RunParams, RunRecord, run_baseline, run_enrich
from .quality import (QualityConstants, class_mos, effective_latency, mos_from_r,
                      r_factor)
from .reduce import (BoundPair, RangeSet, filter_predicates, merge_ranges,
                     reduce_tree, select_boundary_paths, simplify, to_ranges)
from .regtree import RegressionTree, build_tree, enumerate_paths
from .robustness import (Label, RobustnessParams, interpret, label_by_perturbation,
                         normalize, robustness_measure, score_input)
from .shaper import ClassMetrics, ShaperConfig, allocate_bandwidth, simulate
from .stats import mae, mann_whitney_u

__version__ = "0.1.0"
