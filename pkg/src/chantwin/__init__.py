"""chantwin: a desk-scale channel-gain twinning workbench.

Builds coordinate->gain twins of synthetic obstacle-rich scenes (learned MLP,
IDW/Kriging interpolation, fitted path-loss baseline), trains them centrally or
with federated averaging, rasterizes gain maps, and ranks access points for
twin-aware user association.
"""

__version__ = "0.1.0"

from .assoc import AssociationResult, associate_by_distance, associate_by_gain
from .env import (Environment, Obstacle, Position, generate_environment,
                  load_environment, save_environment)
from .fedtwin import ClientShard, FlConfig, aggregate, partition, run_fl
from .interp import (IdwInterpolator, KrigingInterpolator, VariogramModel,
                     fit_variogram)
from .maps import GainMap, build_gain_map, build_si_map, save_map_csv, save_map_pgm
from .metrics import BoxStats, box_stats, error_metrics
from .mlp import (MlpGainRegressor, MlpNet, TrainConfig, gradient_check,
                  load_checkpoint, save_checkpoint)
from .plfit import LogDistancePathLoss, load_pl_model, save_pl_model
from .propagation import (ChannelOracle, PropagationParams, ShadowingField,
                          count_obstructions, shadowing_field, true_gain)
from .sampling import (Dataset, anchor_grid, build_dataset, load_dataset,
                       save_dataset, split_dataset)
