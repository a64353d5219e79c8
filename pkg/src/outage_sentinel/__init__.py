"""Outage Sentinel: PMU-stream outage detection, localization, simulation."""

from .detect import ChannelPeak, ChannelTrigger, DetectionEvent, OutageDetector
from .evaluate import (
    EvaluationRow,
    non_islanding_branches,
    run_evaluation,
    summarize_evaluation,
    write_evaluation_csv,
)
from .exceptions import (
    DatasetSchemaError,
    DisconnectedGraphError,
    DuplicateIdError,
    EmptyDatasetError,
    EvenWindowError,
    InvalidCoordinateError,
    IslandingOutageError,
    LengthMismatchError,
    NoMonitoredBranchError,
    NonpositiveReactanceError,
    SentinelError,
    SingularSystemError,
    UnbalancedInjectionsError,
    UnknownBranchError,
    UnknownBusError,
    UnknownSlackError,
    WindowOutOfRangeError,
)
from .filters import (
    MovingMeanFilter,
    MovingMedianFilter,
    StreamingMean,
    StreamingMedian,
    detrend,
    moving_mean,
    moving_median,
)
from .geo import EARTH_RADIUS_MILES, geo_error, haversine_miles
from .grid import (
    Branch,
    Bus,
    DistributionFactors,
    NetworkModel,
    apply_outage,
    build_network,
    dc_power_flow,
    kcl_residual,
    load_network,
    lodf,
    network_from_dict,
    network_to_dict,
    predicted_flow_change,
    ptdf,
    save_network,
)
from .locate import LocalizationResult, OutageLocator, RankedChange
from .simulate import (
    Channel,
    FreqTemplate,
    NoiseConfig,
    PmuDataset,
    ScenarioConfig,
    channel_id_for_branch,
    frequency_excursion,
    frequency_template,
    inject_noise,
    load_scenario,
    read_dataset_csv,
    resolve_network,
    simulate_scenario,
    write_dataset_csv,
)

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "Bus",
    "Channel",
    "ChannelPeak",
    "ChannelTrigger",
    "DatasetSchemaError",
    "DetectionEvent",
    "DisconnectedGraphError",
    "DistributionFactors",
    "DuplicateIdError",
    "EARTH_RADIUS_MILES",
    "EmptyDatasetError",
    "EvaluationRow",
    "EvenWindowError",
    "FreqTemplate",
    "InvalidCoordinateError",
    "IslandingOutageError",
    "LengthMismatchError",
    "LocalizationResult",
    "MovingMeanFilter",
    "MovingMedianFilter",
    "NetworkModel",
    "NoMonitoredBranchError",
    "NoiseConfig",
    "NonpositiveReactanceError",
    "OutageDetector",
    "OutageLocator",
    "PmuDataset",
    "RankedChange",
    "ScenarioConfig",
    "SentinelError",
    "SingularSystemError",
    "StreamingMean",
    "StreamingMedian",
    "UnbalancedInjectionsError",
    "UnknownBranchError",
    "UnknownBusError",
    "UnknownSlackError",
    "WindowOutOfRangeError",
    "apply_outage",
    "build_network",
    "channel_id_for_branch",
    "dc_power_flow",
    "detrend",
    "frequency_excursion",
    "frequency_template",
    "geo_error",
    "haversine_miles",
    "inject_noise",
    "kcl_residual",
    "load_network",
    "load_scenario",
    "lodf",
    "moving_mean",
    "moving_median",
    "network_from_dict",
    "network_to_dict",
    "non_islanding_branches",
    "predicted_flow_change",
    "ptdf",
    "read_dataset_csv",
    "resolve_network",
    "run_evaluation",
    "save_network",
    "simulate_scenario",
    "summarize_evaluation",
    "write_dataset_csv",
    "write_evaluation_csv",
]
