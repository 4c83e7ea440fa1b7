"""Link-level simulation and analysis of variable-size antenna-activation spatial modulation."""

from .bounds import BoundResult, bound_curve, classic_union_bound, improved_bound, improved_components, mgf_gamma
from .channel import NoiseModel, sample_channel, transmit
from .config import emit_csv, parse_config
from .constellation import Constellation, build_constellation, demap_round, nearest_oracle, rotate, rotation_order
from .detectors import DetectionDecision, complexity_model, dmld, mld, tmld
from .harness import Scenario, SweepResult, run_point, sweep
from .mapping import BitBlock, PatternBook, build_book, encode, equivalent_channel, throughput

__version__ = "0.1.0"
