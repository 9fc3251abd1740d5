# models.py
from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Iterator, List, Optional, Tuple
from pathlib import Path
from enum import Enum
import math

import numpy as np

from config import settings
from utils import validate_ratio, validate_interference, validate_db_range, parse_db_range, db_to_linear, format_number

# Enums
class Scheme(str, Enum):
    MRC = "mrc"
    ZF = "zf"
    MMSE = "mmse"
    IDEAL = "ideal"  # interference-free relay, the large-N reference

class Method(str, Enum):
    MC = "mc"
    ANALYTIC_EXACT = "analytic-exact"
    ANALYTIC_UPPER = "analytic-upper"
    ANALYTIC_LOWER = "analytic-lower"
    ANALYTIC_LARGEN = "analytic-largen"
    QUADRATURE = "quadrature-oracle"
    QUADRATURE_UPPER = "quadrature-upper"
    QUADRATURE_LOWER = "quadrature-lower"

class HopQuantity(str, Enum):
    GAMMA1 = "gamma1"
    GAMMA2 = "gamma2"
    GAMMA_END = "gamma_end"

METHOD_CHOICES = ("mc", "analytic", "upper", "lower", "largen", "quadrature")

# System Models
class SystemConfig(BaseModel):
    n: int = Field(..., ge=1)
    m: int = Field(0, ge=0)
    rho1: float
    rho2: float
    rho_i: Tuple[float, ...] = ()

    class Config:
        frozen = True

    @field_validator('rho1', 'rho2')
    @classmethod
    def validate_snr(cls, v, info):
        ok, message = validate_ratio(v, info.field_name)
        if not ok:
            raise ValueError(message)
        return float(v)

    @model_validator(mode='after')
    def validate_interferers(self):
        result = validate_interference(self.rho_i, self.m)
        if not result["is_valid"]:
            raise ValueError(f"Interference validation failed: {', '.join(result['errors'])}")
        return self

    @property
    def equal_interference(self) -> bool:
        return len(set(self.rho_i)) <= 1

    @property
    def common_rho_i(self) -> Optional[float]:
        """Shared INR when all interferers are equal, None otherwise"""
        if self.m == 0 or not self.equal_interference:
            return None
        return self.rho_i[0]

    def with_snr(self, rho1: Optional[float] = None, rho2: Optional[float] = None) -> "SystemConfig":
        """Copy with new hop SNRs, validated"""
        return SystemConfig(
            n=self.n,
            m=self.m,
            rho1=self.rho1 if rho1 is None else rho1,
            rho2=self.rho2 if rho2 is None else rho2,
            rho_i=self.rho_i,
        )

class InterferenceProfile(BaseModel):
    rho_i: Tuple[float, ...] = ()
    distinct: Tuple[float, ...] = ()
    multiplicities: Tuple[int, ...] = ()
    chi: Tuple[Tuple[float, ...], ...] = ()

    @model_validator(mode='after')
    def validate_grouping(self):
        if sum(self.multiplicities) != len(self.rho_i):
            raise ValueError("multiplicities must add up to the interferer count")
        if len(self.distinct) != len(self.multiplicities) or len(self.chi) != len(self.distinct):
            raise ValueError("distinct values, multiplicities and chi rows must align")
        for tau, row in zip(self.multiplicities, self.chi):
            if len(row) != tau:
                raise ValueError("each chi row needs one entry per multiplicity")
        if any(a <= b for a, b in zip(self.distinct, self.distinct[1:])):
            raise ValueError("distinct values must be strictly decreasing")
        return self

    @property
    def rank(self) -> int:
        """Number of distinct interferer powers"""
        return len(self.distinct)

    def terms(self) -> Iterator[Tuple[int, int, float, float]]:
        """Yield (i, j, rho, chi) with 1-based i and j, skipping zero coefficients"""
        for i, (rho, row) in enumerate(zip(self.distinct, self.chi), start=1):
            for j, coefficient in enumerate(row, start=1):
                if coefficient != 0.0:
                    yield i, j, rho, coefficient

    def product(self, s: float) -> float:
        """Product form prod_l (1 + rho_l s)^(-tau_l)"""
        return math.prod((1.0 + rho * s) ** (-tau) for rho, tau in zip(self.distinct, self.multiplicities))

    def reconstruct(self, s: float) -> float:
        """Partial-fraction form sum_ij chi_ij (1 + rho_i s)^(-j)"""
        return math.fsum(chi * (1.0 + rho * s) ** (-j) for _, j, rho, chi in self.terms())

# Channel Models
class ChannelRealization(BaseModel):
    h1: np.ndarray
    h2: np.ndarray
    h_i: np.ndarray

    class Config:
        arbitrary_types_allowed = True

    @field_validator('h1', 'h2', 'h_i', mode='before')
    @classmethod
    def as_complex_array(cls, v):
        return np.asarray(v, dtype=complex)

    @field_validator('h_i')
    @classmethod
    def as_matrix(cls, v):
        return v.reshape(-1, 1) if v.ndim == 1 else v

    @model_validator(mode='after')
    def validate_shapes(self):
        n = self.h1.shape[0]
        if self.h1.shape != (n,) or self.h2.shape != (n,) or self.h_i.shape[0] != n:
            raise ValueError("h1, h2 and h_i must share the antenna dimension")
        for name in ("h1", "h2", "h_i"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} has non-finite entries")
        return self

    @property
    def n(self) -> int:
        return self.h1.shape[0]

    @property
    def m(self) -> int:
        return self.h_i.shape[1]

class ChannelBatch(BaseModel):
    """A block of realizations stacked along a leading sample axis."""
    h1: np.ndarray
    h2: np.ndarray
    h_i: np.ndarray

    class Config:
        arbitrary_types_allowed = True

    @model_validator(mode='after')
    def validate_shapes(self):
        if self.h1.ndim != 2 or self.h2.shape != self.h1.shape:
            raise ValueError("h1 and h2 must be (samples, n) arrays")
        if self.h_i.ndim != 3 or self.h_i.shape[:2] != self.h1.shape:
            raise ValueError("h_i must be a (samples, n, m) array")
        return self

    @property
    def size(self) -> int:
        return self.h1.shape[0]

    def head(self, count: int) -> "ChannelBatch":
        return ChannelBatch(h1=self.h1[:count], h2=self.h2[:count], h_i=self.h_i[:count])

    def realization(self, row: int) -> ChannelRealization:
        return ChannelRealization(h1=self.h1[row].copy(), h2=self.h2[row].copy(), h_i=self.h_i[row].copy())

    @classmethod
    def from_realization(cls, real: ChannelRealization) -> "ChannelBatch":
        return cls(h1=real.h1[None, :], h2=real.h2[None, :], h_i=real.h_i[None, :, :])

# Precoding Models
class SinrBreakdown(BaseModel):
    gamma1: float = Field(..., ge=0)
    gamma2: float = Field(..., ge=0)
    gamma_end: float = Field(..., ge=0)
    scheme: Scheme

    @model_validator(mode='after')
    def validate_combination(self):
        if self.gamma_end > min(self.gamma1, self.gamma2) * (1 + 1e-12):
            raise ValueError("end-to-end SINR cannot exceed either hop")
        return self

class RelayWeights(BaseModel):
    w1: np.ndarray
    omega2: float = Field(..., ge=0)
    steering: np.ndarray
    scheme: Scheme

    class Config:
        arbitrary_types_allowed = True

    def relay_matrix(self) -> np.ndarray:
        """W = omega * steering * w1"""
        return math.sqrt(self.omega2) * np.outer(self.steering, self.w1)

# Result Models
class CapacityEstimate(BaseModel):
    value: float = Field(..., ge=0)
    stderr: float = Field(0.0, ge=0)
    samples: int = Field(0, ge=0)
    method: Method
    seed: Optional[int] = None

class MomentEstimate(BaseModel):
    value: float
    stderr: float = Field(..., ge=0)
    samples: int = Field(..., ge=1)

class TermRecord(BaseModel):
    name: str
    value: float
    error: float = Field(0.0, ge=0)

class TheoremResult(BaseModel):
    value: float
    c_gamma1: float
    c_gamma2: float
    c_cross: float
    error: float = Field(0.0, ge=0)
    method: Method
    scheme: Scheme
    provenance: List[TermRecord] = Field(default_factory=list)

    @model_validator(mode='after')
    def validate_decomposition(self):
        rebuilt = self.c_gamma1 + self.c_gamma2 - self.c_cross
        if abs(self.value - rebuilt) > 1e-10 * max(1.0, abs(self.value)):
            raise ValueError("value must equal c_gamma1 + c_gamma2 - c_cross")
        return self

    def term(self, name: str) -> TermRecord:
        for record in self.provenance:
            if record.name == name:
                return record
        raise KeyError(name)

class CheckRecord(BaseModel):
    name: str
    computed: float
    expected: float
    rel_error: float
    tolerance: float
    passed: bool

# Special Function Models
class MeijerGSpec(BaseModel):
    m: int = Field(..., ge=0)
    n: int = Field(..., ge=0)
    p: int = Field(..., ge=0)
    q: int = Field(..., ge=0)
    a_params: Tuple[float, ...] = ()
    b_params: Tuple[float, ...] = ()
    argument: float = Field(..., gt=0)

    class Config:
        frozen = True

    @model_validator(mode='after')
    def validate_orders(self):
        if len(self.a_params) != self.p or len(self.b_params) != self.q:
            raise ValueError("parameter list lengths must equal p and q")
        if self.m > self.q or self.n > self.p:
            raise ValueError("orders must satisfy m <= q and n <= p")
        return self

    @classmethod
    def build(cls, a_params, b_params, m: int, n: int, argument: float) -> "MeijerGSpec":
        a = tuple(float(v) for v in a_params)
        b = tuple(float(v) for v in b_params)
        return cls(m=m, n=n, p=len(a), q=len(b), a_params=a, b_params=b, argument=argument)

class MeijerG2Spec(BaseModel):
    """
    Two-variable G of type G^{1,n2,n3,1,1}_{1,[p2:p3],0,[q2:q3]}.

    One shared upper parameter, per-variable upper groups (all in the
    numerator) and per-variable lower groups whose first entry is in the
    numerator.
    """
    shared: float
    x_upper: Tuple[float, ...]
    y_upper: Tuple[float, ...]
    x_lower: Tuple[float, ...]
    y_lower: Tuple[float, ...]
    x: float = Field(..., gt=0)
    y: float = Field(..., gt=0)

    class Config:
        frozen = True

    @model_validator(mode='after')
    def validate_groups(self):
        if not self.x_lower or not self.y_lower:
            raise ValueError("each lower group needs its leading numerator parameter")
        return self

    @property
    def signature(self) -> str:
        n2, n3 = len(self.x_upper), len(self.y_upper)
        q2, q3 = len(self.x_lower), len(self.y_lower)
        return f"G^{{1,{n2},{n3},1,1}}_{{1,[{n2}:{n3}],0,[{q2}:{q3}]}}"

class ContourPlan(BaseModel):
    offsets: Tuple[float, ...]
    half_lengths: Tuple[float, ...]
    nodes: Tuple[int, ...]
    rule: str = "gauss-legendre"

    class Config:
        frozen = True

    @model_validator(mode='after')
    def validate_plan(self):
        if not (len(self.offsets) == len(self.half_lengths) == len(self.nodes)):
            raise ValueError("one offset, half-length and node count per axis")
        if any(length <= 0 for length in self.half_lengths):
            raise ValueError("half-lengths must be positive")
        if any(count < settings.CONTOUR_MIN_NODES for count in self.nodes):
            raise ValueError(f"node counts must be at least {settings.CONTOUR_MIN_NODES}")
        return self

    def doubled(self) -> "ContourPlan":
        return ContourPlan(
            offsets=self.offsets,
            half_lengths=self.half_lengths,
            nodes=tuple(2 * count for count in self.nodes),
            rule=self.rule,
        )

class ContourEstimate(BaseModel):
    value: float
    error: float = Field(..., ge=0)
    plan: ContourPlan

class ContourFamilyEstimate(BaseModel):
    """Values and error estimates of a matrix of G evaluations on one contour."""
    values: np.ndarray
    errors: np.ndarray
    plan: ContourPlan

    class Config:
        arbitrary_types_allowed = True

# Sweep Models
class SweepSpec(BaseModel):
    schemes: List[Scheme] = Field(..., min_length=1)
    n: int = Field(..., ge=1)
    m: int = Field(0, ge=0)
    rho1_db_start: float
    rho1_db_stop: float
    rho1_db_step: float = 1.0
    rho2_db: Optional[float] = None  # None means equal to rho1
    rhoi_db: List[float] = Field(default_factory=list)
    methods: List[str] = Field(..., min_length=1)
    samples: int = Field(settings.MC_SAMPLES, ge=1)
    seed: int = Field(settings.MC_SEED, ge=0)
    threads: int = Field(1, ge=1)
    output: Optional[Path] = None

    @field_validator('methods')
    @classmethod
    def validate_methods(cls, v):
        unknown = [method for method in v if method not in METHOD_CHOICES]
        if unknown:
            raise ValueError(f"Unknown methods: {', '.join(unknown)}")
        return v

    @model_validator(mode='after')
    def validate_sweep(self):
        ok, message = validate_db_range(self.rho1_db_start, self.rho1_db_stop, self.rho1_db_step)
        if not ok:
            raise ValueError(message)
        if len(self.rhoi_db) != self.m:
            raise ValueError(f"expected {self.m} interferer INRs, got {len(self.rhoi_db)}")
        return self

    @classmethod
    def from_range(cls, rho1_db: str, **kwargs) -> "SweepSpec":
        points = parse_db_range(rho1_db)
        step = points[1] - points[0] if len(points) > 1 else 1.0
        return cls(rho1_db_start=points[0], rho1_db_stop=points[-1], rho1_db_step=step, **kwargs)

    def rho1_points(self) -> List[float]:
        return parse_db_range(f"{self.rho1_db_start}:{self.rho1_db_stop}:{self.rho1_db_step}")

    def points(self) -> List["SweepPoint"]:
        """One point per (scheme, method, rho1), curves kept contiguous"""
        rho1_values = self.rho1_points()
        return [
            SweepPoint(
                scheme=scheme,
                method=method,
                n=self.n,
                m=self.m,
                rho1_db=rho1_db,
                rho2_db=rho1_db if self.rho2_db is None else self.rho2_db,
                rhoi_db=tuple(self.rhoi_db),
            )
            for scheme in self.schemes
            for method in self.methods
            for rho1_db in rho1_values
        ]

class SweepPoint(BaseModel):
    """One operating point in dB, as given on the command line"""
    scheme: Scheme
    method: str
    n: int = Field(..., ge=1)
    m: int = Field(0, ge=0)
    rho1_db: float
    rho2_db: float
    rhoi_db: Tuple[float, ...] = ()

    @field_validator('method')
    @classmethod
    def validate_method(cls, v):
        if v not in METHOD_CHOICES:
            raise ValueError(f"Unknown method: {v}")
        return v

    def config(self) -> SystemConfig:
        return SystemConfig(
            n=self.n,
            m=self.m,
            rho1=db_to_linear(self.rho1_db),
            rho2=db_to_linear(self.rho2_db),
            rho_i=tuple(db_to_linear(v) for v in self.rhoi_db),
        )

# Output Models
CSV_COLUMNS = ("scheme", "method", "n", "m", "rho1_db", "rho2_db", "rhoi_db", "capacity_bits", "stderr", "samples", "seed")

class CapacityRow(BaseModel):
    point: SweepPoint
    method: Method
    capacity_bits: float
    stderr: float = Field(0.0, ge=0)
    samples: int = Field(0, ge=0)
    seed: Optional[int] = None

    def cells(self) -> List[str]:
        return [
            self.point.scheme.value,
            self.method.value,
            str(self.point.n),
            str(self.point.m),
            format_number(self.point.rho1_db),
            format_number(self.point.rho2_db),
            ";".join(format_number(v) for v in self.point.rhoi_db),
            format_number(self.capacity_bits),
            format_number(self.stderr),
            str(self.samples),
            "" if self.seed is None else str(self.seed),
        ]
