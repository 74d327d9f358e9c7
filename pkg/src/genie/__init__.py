"""Genie hierarchical clustering: single linkage under a cluster-size
inequity constraint, computed from an exact minimum spanning tree."""

from .errors import (ConfigurationError, GenieError, InternalConsistencyError,
                     ParseError, ResourceLimitError, UndefinedScoreError)
from .inequity import GiniTracker, bonferroni, gini
from .linkage import (AlgorithmConfig, ConditionalPq, MergeHistory,
                      classic_linkage, cut, genie, hclust, single_linkage)
from .metrics import (CallCounter, DatasetView, Metric, MetricSpace,
                      dissimilarity, get_metric)
from .mst import Mst, MstEdge, build_mst, mst_kruskal_nn, mst_prim
from .unionfind import SizedDisjointSets
from .vptree import VpTree

__version__ = "0.1.0"
