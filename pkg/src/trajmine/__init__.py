"""Mine points of interest, travel sequences and itineraries from GPS logs."""
from .config import PipelineConfig
from .errors import (
    CoordinateError,
    EmptyInputError,
    GpxMissingFieldError,
    GpxSyntaxError,
    GpxTimestampError,
    ParseError,
    PipelineError,
    TrajMineError,
    UnknownPoiError,
)
from .formats import (
    export_csv,
    export_geojson,
    export_gpx,
    export_route_gpx,
    parse_csv,
    parse_gpx,
)
from .geo import Coordinate, GeoConfig, centroid, duration_estimate, haversine_distance
from .mining import (
    HitsScores,
    OpticsParams,
    PoiCluster,
    build_tbhg,
    extract_clusters,
    hits_scores,
    mine_sequences,
    optics_order,
    rank_pois,
)
from .pipeline import STAGES, plan_from_store, report, run_pipeline
from .planner import (
    PlanParams,
    Poi,
    PoiCatalog,
    build_itinerary_index,
    distance_duration,
    enumerate_single_day,
    plan_multiday,
)
from .store import Store
from .synth import SynthSpec, generate_synthetic, write_synthetic
from .staypoint import StayPoint, StayPointParams, detect_corpus, detect_stay_points
from .trajectory import GpsPoint, SpeedProfile, Trajectory, clean, speed_profile

__version__ = "0.1.0"
