"""User-centered regression workbench.

Pipeline: load a table, decompose the target into presence vectors,
inspect the attribute-label correlation panorama, fit binary/multinomial
logistic models, evaluate them with ROC/AUC or the radial item view, then
package trained charts into a query panorama for profile predictions.

The two ``build_panorama`` operations live in their own modules:
``correlation.build_panorama`` (the correlation matrix) and
``panorama.build_panorama`` (the trained multi-chart file).
"""

from . import correlation, dataset, evaluation, logit, panorama, query, radviz
from .correlation import GLOBAL, CorrelationPanorama, attr_vs_attr, pearson, rank_attributes
from .dataset import Dataset, TargetDecomposition, column_stats, decompose_target, load_table
from .evaluation import ConfusionMatrix, RocCurve, auc_pairs_oracle, confusion, roc_curve, split
from .logit import (
    BinaryLogitModel,
    FitConfig,
    MultinomialModel,
    ProbabilityMatrix,
    fit_binary,
    fit_multinomial,
    predict_binary,
    predict_multinomial,
    probability_matrix,
    sigmoid,
    softmax,
)
from .panorama import Chart, ChartSpec, PanoramaFile, dataset_fingerprint
from .query import BatchResult, QuerySession, batch_query, query as query_profile, similar_cases, streamgraph, submit_state
from .radviz import AnchorRing, ProjectedPoint, layout_attributes, layout_items, place_anchors, radviz_map

__version__ = "0.1.0"
