"""Certified numerics for the Cantor-bouquet model of exp(z) - 1.

Core surfaces:

* ``sequences`` - rule-described integer sequences (constant, periodic,
  iterated-exponential tower, exponential ramp) with symbolic entries.
* ``model``     - certified potentials, endpoint heights, point
  classification for the half-line-times-sequence model dynamics.
* ``strata``    - the escaping-endpoint stratification, membership and
  extension certificates, nowhere-density witness families.
* ``plane``     - companion dynamics for exp(z) + a: orbits, itineraries,
  cycles, escape-time rendering.
* ``cli``       - the ``expbouquet`` command.
"""

from .intervals import Interval, RigorError, TriBool
from .model import (
    BudgetExceededError,
    CertifiedLarge,
    Classification,
    ModelPoint,
    NonConvergenceError,
    NotInDomain,
    OverflowGuardError,
    UnsupportedTailError,
    Verdict,
    classify,
    endpoint_height,
    endpoint_height_enclosure,
    endpoint_lower_bound,
    growth,
    growth_inverse,
    is_escaping_endpoint_address,
    model_step,
    potential,
    potential_term,
)
from .plane import (
    CycleInfo,
    EscapeRecord,
    NoConvergenceError,
    RenderSummary,
    Viewport,
    escape_record,
    exp_orbit,
    find_cycle,
    region_stays_outside,
    render_escape,
    strip_itinerary,
)
from .sequences import (
    Asymptotics,
    ConstTail,
    DescriptorError,
    ExpTowerTail,
    LinExpTail,
    PeriodicTail,
    SymbolSeq,
    const_seq,
    fexp_seq,
    linexp_seq,
    periodic_seq,
)
from .strata import (
    AlphaIndex,
    IncomparableTailsError,
    WitnessReport,
    address_distance,
    extension_index,
    in_stratum,
    least_witness_depth,
    point_distance,
    witness_cut_index,
    witness_family,
    witness_sequence,
)
from .verify import RunConfig, run_all

__version__ = "0.1.0"

__all__ = [
    "AlphaIndex",
    "Asymptotics",
    "BudgetExceededError",
    "CertifiedLarge",
    "Classification",
    "ConstTail",
    "CycleInfo",
    "DescriptorError",
    "EscapeRecord",
    "ExpTowerTail",
    "IncomparableTailsError",
    "Interval",
    "LinExpTail",
    "ModelPoint",
    "NoConvergenceError",
    "NonConvergenceError",
    "NotInDomain",
    "OverflowGuardError",
    "PeriodicTail",
    "RenderSummary",
    "RigorError",
    "RunConfig",
    "SymbolSeq",
    "TriBool",
    "UnsupportedTailError",
    "Verdict",
    "Viewport",
    "WitnessReport",
    "address_distance",
    "classify",
    "const_seq",
    "endpoint_height",
    "endpoint_height_enclosure",
    "endpoint_lower_bound",
    "escape_record",
    "exp_orbit",
    "extension_index",
    "fexp_seq",
    "find_cycle",
    "growth",
    "growth_inverse",
    "in_stratum",
    "is_escaping_endpoint_address",
    "least_witness_depth",
    "linexp_seq",
    "model_step",
    "periodic_seq",
    "point_distance",
    "potential",
    "potential_term",
    "region_stays_outside",
    "render_escape",
    "run_all",
    "strip_itinerary",
    "witness_cut_index",
    "witness_family",
    "witness_sequence",
]
