import math
from enum import Enum
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class MtdState(str, Enum):
    N = "N"  # running normally
    T = "T"  # targeted
    E = "E"  # exploited
    B = "B"  # breached


class MtdAction(str, Enum):
    WAIT = "Wait"
    DEFEND = "Defend"
    RESET = "Reset"


CostParameter = Literal["cost_defend", "cost_reset", "cost_exploit", "cost_targeted", "cost_breach"]
COST_PARAMETERS = ("cost_defend", "cost_reset", "cost_exploit", "cost_targeted", "cost_breach")


class MdpModel(BaseModel):
    """
    Finite MDP (S, A, P, R).

    transitions[state][action] maps next-state -> probability; an action missing
    from transitions[state] is unavailable there. rewards uses the same nesting.
    Construction does not check stochasticity; run mdp_solver.validate for that.
    """

    model_config = ConfigDict(frozen=True)

    states: List[str]
    actions: List[str]
    transitions: Dict[str, Dict[str, Dict[str, float]]]
    rewards: Dict[str, Dict[str, Dict[str, float]]] = {}

    def available_actions(self, state: str) -> List[str]:
        row = self.transitions.get(state, {})
        return [a for a in self.actions if a in row]


class Violation(BaseModel):
    state: Optional[str] = None
    action: Optional[str] = None
    rule: str
    message: str


class ValueFunction(BaseModel):
    model_config = ConfigDict(frozen=True)

    values: Dict[str, float]

    @field_validator("values")
    @classmethod
    def _finite(cls, values: Dict[str, float]) -> Dict[str, float]:
        bad = [s for s, v in values.items() if not math.isfinite(v)]
        if bad:
            raise ValueError(f"non-finite value at states: {', '.join(bad)}")
        return values

    def __getitem__(self, state: str) -> float:
        return self.values[state]


class Policy(BaseModel):
    model_config = ConfigDict(frozen=True)

    assignment: Dict[str, str]

    def __getitem__(self, state: str) -> str:
        return self.assignment[state]


class SolveReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: ValueFunction
    policy: Policy
    iterations: int = Field(..., ge=0)
    final_delta: float
    q_table: Dict[str, Dict[str, float]]
    deltas: List[float] = []
    converged: bool = True


class MtdParams(BaseModel):
    """Named parameters of the MTD decision process. Defaults are the published baseline."""

    model_config = ConfigDict(
        frozen=True,
        extra="forbid",
        allow_inf_nan=False,
        json_schema_extra={
            "example": {
                "p_target": 0.2,
                "p_exploit": 0.2,
                "p_defend": 0.6,
                "p_breach": 0.4,
                "reward_base": 10.0,
                "reward_defend": 5.0,
                "cost_targeted": 0.1,
                "cost_exploit": 3.0,
                "cost_breach": 4.0,
                "cost_reset": 4.0,
                "cost_defend": 4.0,
                "gamma": 0.9,
                "epsilon": 0.001,
                "breach_defendable": False,
            }
        },
    )

    p_target: float = Field(0.2, ge=0, le=1)
    p_exploit: float = Field(0.2, ge=0, le=1)  # P_E, also written P_A
    p_defend: float = Field(0.6, ge=0, le=1)
    p_breach: float = Field(0.4, ge=0, le=1)
    reward_base: float = 10.0
    reward_defend: float = 5.0
    cost_targeted: float = Field(0.1, ge=0)
    cost_exploit: float = Field(3.0, ge=0)  # C_E, also written C_A
    cost_breach: float = Field(4.0, ge=0)
    cost_reset: float = Field(4.0, ge=0)
    cost_defend: float = Field(4.0, ge=0)
    gamma: float = Field(0.9, gt=0, lt=1)
    epsilon: float = Field(0.001, gt=0)
    breach_defendable: bool = False


class SweepPoint(BaseModel):
    fraction: float
    absolute_cost: float
    actions: Dict[str, str]
    values: Dict[str, float]
    q_values: Dict[str, Dict[str, float]]


class SweepResult(BaseModel):
    swept_parameter: CostParameter
    scale_base: float = Field(..., gt=0)
    base_params: MtdParams
    grid: List[SweepPoint] = Field(..., min_length=1)

    @model_validator(mode="after")
    def _increasing(self) -> "SweepResult":
        fractions = [p.fraction for p in self.grid]
        if any(b <= a for a, b in zip(fractions, fractions[1:])):
            raise ValueError("sweep grid must be strictly increasing in cost fraction")
        return self

    @property
    def fractions(self) -> List[float]:
        return [p.fraction for p in self.grid]


class TurningPoint(BaseModel):
    state: str
    from_action: str
    to_action: str
    bracket_low: float
    bracket_high: float

    @model_validator(mode="after")
    def _ordered(self) -> "TurningPoint":
        if not self.bracket_low < self.bracket_high:
            raise ValueError("bracket_low must be below bracket_high")
        return self


class LinearSegment(BaseModel):
    start: float
    end: float
    slope: float
    intercept: float


class PiecewiseLinearFit(BaseModel):
    state: str
    action: str
    segments: List[LinearSegment] = Field(..., min_length=1, max_length=2)
    breakpoint: Optional[float] = None
    max_residual: float = Field(..., ge=0)


class PhaseDiagram(BaseModel):
    """actions[i][j] is the optimal action at x_fractions[i], y_fractions[j]."""

    x_parameter: CostParameter
    y_parameter: CostParameter
    state: str
    params: MtdParams
    scale_base: float = Field(..., gt=0)
    x_fractions: List[float] = Field(..., min_length=1)
    y_fractions: List[float] = Field(..., min_length=1)
    actions: List[List[str]]

    @model_validator(mode="after")
    def _dimensions(self) -> "PhaseDiagram":
        if len(self.actions) != len(self.x_fractions) or any(
            len(column) != len(self.y_fractions) for column in self.actions
        ):
            raise ValueError("action matrix does not match the grid resolution")
        return self

    def action_at(self, x_fraction: float, y_fraction: float) -> str:
        i = min(range(len(self.x_fractions)), key=lambda k: abs(self.x_fractions[k] - x_fraction))
        j = min(range(len(self.y_fractions)), key=lambda k: abs(self.y_fractions[k] - y_fraction))
        return self.actions[i][j]


class CaseStudyPreset(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    description: str
    x_parameter: CostParameter
    y_parameter: CostParameter
    overrides: Dict[str, float]
    fractions: List[float]
    state: MtdState = MtdState.E


class McEstimate(BaseModel):
    state: str
    policy: Policy
    episodes: int = Field(..., ge=1)
    horizon: int = Field(..., ge=1)
    seed: int
    mean_return: float
    standard_error: float = Field(..., ge=0)


class PolicyValue(BaseModel):
    policy: Policy
    value: ValueFunction


class EnumerationResult(BaseModel):
    best_policy: Optional[Policy]  # None when no single policy attains the envelope everywhere
    envelope: ValueFunction
    uniform_optimum: bool
    ties: List[Policy]
    table: List[PolicyValue]


Experiment = Literal["solve", "sweep", "turning-point", "phase", "mc-eval", "enumerate", "case-study"]


class RunConfig(MtdParams):
    """Flat run configuration: every MtdParams key plus the experiment settings."""

    model_config = ConfigDict(
        frozen=True,
        extra="forbid",
        allow_inf_nan=False,
        json_schema_extra={
            "example": {
                "gamma": 0.9,
                "epsilon": 0.001,
                "experiment": "sweep",
                "sweep_parameter": "cost_defend",
                "sweep_from": 0.05,
                "sweep_to": 1.0,
                "sweep_step": 0.025,
                "seed": 7,
            }
        },
    )

    experiment: Experiment = "solve"
    state: MtdState = MtdState.E
    sweep_parameter: CostParameter = "cost_defend"
    sweep_from: float = Field(0.05, ge=0, le=1.5)
    sweep_to: float = Field(1.0, ge=0, le=1.5)
    sweep_step: float = Field(0.025, gt=0)
    scale_base: Optional[float] = Field(None, gt=0)
    tolerance: float = Field(0.005, gt=0)
    x_parameter: CostParameter = "cost_defend"
    y_parameter: CostParameter = "cost_exploit"
    grid_step: float = Field(0.025, gt=0)
    preset: Literal["decoy", "scit"] = "decoy"
    episodes: int = Field(10_000, ge=1)
    horizon: Optional[int] = Field(None, ge=1)
    seed: int = 0
    output: Optional[str] = None

    def to_params(self) -> MtdParams:
        return MtdParams(**self.model_dump(include=set(MtdParams.model_fields)))
