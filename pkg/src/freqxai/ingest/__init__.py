from freqxai.ingest.catalog import (  # noqa: F401
    DAY_AHEAD,
    DAY_AHEAD_FEATURES,
    EX_POST,
    FEATURE_CATALOG,
    FEATURE_NAMES,
    RAW_FEATURES,
)
from freqxai.ingest.features import FeatureFrame, engineer_features, join_target  # noqa: F401
from freqxai.ingest.pipeline import (  # noqa: F401
    AreaBuild,
    build_area_frame,
    read_manifest,
    write_manifest,
)
from freqxai.ingest.regions import (  # noqa: F401
    AggregationPolicy,
    AggregationResult,
    RegionSeries,
    aggregate_regions,
    clean_outliers,
    downsample_to_hourly,
    weighted_price_average,
)
from freqxai.ingest.synthetic import SCENARIOS, SyntheticArea, generate_synthetic_area  # noqa: F401
