from typing import Dict, List, Optional, Any, Tuple
from pydantic import BaseModel, Field

Value = Any  # "p/q" string in exact spaces, float otherwise


class Response(BaseModel):
    error: Optional[str] = None

    def exit_code(self) -> int:
        return 1 if self.error else 0

    def table(self) -> Optional[Tuple[List[str], List[List[Any]]]]:
        """(columns, rows) for the CSV companion report, if tabular"""
        return None

# ==================== SPACE MODELS ====================

class CircleSpaceRequest(BaseModel):
    n: int = Field(description="number of rim points")

class UnionSpaceRequest(BaseModel):
    k: int = Field(description="largest circle level; circles C_4 .. C_{4^k}")

class GridSpaceRequest(BaseModel):
    m: int = Field(description="lattice side, points {0..m}^dim")
    dim: int = 2

class SpaceValidateRequest(BaseModel):
    file: str = Field(description="space JSON file")

class ViolationModel(BaseModel):
    kind: str
    points: List[str]
    detail: str

class SpaceResponse(Response):
    valid: bool = True
    points: List[str] = []
    base: int = 0
    dist: List[List[Value]] = []
    exact: bool = True
    kind: Optional[str] = None
    params: Dict[str, int] = {}
    violations: List[ViolationModel] = []

    def exit_code(self) -> int:
        return 1 if self.error or not self.valid else 0

# ==================== NORM MODELS ====================

class NormRequest(BaseModel):
    space: str = Field(description="space JSON file")
    measure: str = Field(description='"label:coeff,..." or a JSON/CSV file of (label, coeff) pairs')
    canonical: bool = Field(True, description="lexicographically smallest optimal witness")

class NormResponse(Response):
    primal: Optional[Value] = None
    dual: Optional[Value] = None
    witness: Dict[str, Value] = {}
    witness_lip: Optional[Value] = None

    def table(self):
        return ["label", "value"], [[k, v] for k, v in self.witness.items()]

# ==================== SYSTEM MODELS ====================

class SystemBuildRequest(BaseModel):
    space: str = Field(description="space JSON file")
    rule: str = Field("row-major", description="row-major | random | peel-balanced | peel-one-arc | greedy-min-lip")
    seed: Optional[int] = Field(None, description="seed for the random rule")

class SystemRequest(BaseModel):
    space: str = Field(description="space JSON file")
    system: str = Field(description="system JSON file")

class SystemChainRequest(SystemRequest):
    point: str = Field(description="label of the chain's final point")

class SystemResponse(Response):
    order: List[str] = []
    parent: Dict[str, str] = {}
    lip: List[Value] = []

class SystemValidationResponse(Response):
    valid: bool = False
    violations: List[ViolationModel] = []
    checked_triples: int = 0

    def exit_code(self) -> int:
        return 1 if self.error or not self.valid else 0

class LipResponse(Response):
    lip: List[Value] = []
    max: Optional[Value] = None
    argmax: Optional[int] = None

    def table(self):
        return ["i", "lip"], [[i, v] for i, v in enumerate(self.lip)]

class ChainResponse(Response):
    chain: List[str] = []
    positions: List[int] = []

# ==================== BASIS MODELS ====================

class UnconditionalRequest(SystemRequest):
    exhaustive: bool = Field(False, description="enumerate every sign pattern")
    samples: int = Field(100, description="sampled sign patterns when not exhaustive")

class WitnessRequest(SystemRequest):
    beta: str = Field("1", description="density constant of the net")
    alpha: Optional[str] = Field(None, description="separation; defaults to the space's minimum distance")

class BasisConstantResponse(Response):
    value: Optional[Value] = None
    per_n: List[Value] = []

    def table(self):
        return ["n", "norm"], [[n, v] for n, v in enumerate(self.per_n)]

class UnconditionalResponse(Response):
    value: Optional[Value] = None
    eps: List[int] = []
    mode: str = ""
    patterns: int = 0
    seed: Optional[int] = None
    lower_bound: bool = False

class WitnessResponse(Response):
    S: List[str] = []
    T: List[str] = []
    n: int = 0
    t: int = 0
    bound: Optional[Value] = None
    certified: Optional[Value] = None
    signed_sum_norm: Optional[Value] = None
    eps: List[int] = []
    f: Dict[str, Value] = {}

# ==================== SEARCH MODELS ====================

class SearchCircleRequest(BaseModel):
    n: int = Field(description="circle size")
    target: str = Field("auto", description="auto | positive rational")
    budget_nodes: Optional[int] = Field(None, description="node limit")
    budget_secs: Optional[float] = Field(None, description="wall-clock limit; FREELAB_BUDGET_SECS otherwise")
    resume: Optional[str] = Field(None, description="frontier checkpoint to resume from")
    checkpoint: Optional[str] = Field(None, description="where to write the frontier if the budget runs out")

class HeuristicRequest(BaseModel):
    n: int = Field(description="circle size")
    strategy: str = Field("greedy-min-lip", description="peel-balanced | peel-one-arc | greedy-min-lip")

class SearchCertificateResponse(Response):
    n: int = 0
    target: str = ""
    target_value: Optional[float] = None
    outcome: str = ""
    nodes_explored: int = 0
    wall_time: float = 0.0
    system: Optional[Dict[str, Any]] = None
    achieved: Optional[Value] = None
    heuristics: Dict[str, Value] = {}
    frontier_size: int = 0
    checkpoint: Optional[str] = None

    def exit_code(self) -> int:
        if self.error:
            return 1
        return 2 if self.outcome == "indeterminate" else 0

class HeuristicResponse(Response):
    n: int = 0
    strategy: str = ""
    achieved: Optional[Value] = None
    bound: Optional[float] = None
    system: Optional[Dict[str, Any]] = None
    lip: List[Value] = []

# ==================== EXTENSIONAL MODELS ====================

class ExtensionalVerifyRequest(BaseModel):
    k: int = Field(description="circle-union truncation level")
    i_range: Optional[str] = Field(None, description="index range a..b")
    all_pairs: bool = Field(False, description="check T_i T_j = T_min for every pair in range")
    samples: int = Field(20, description="random functions per index for the contraction check")

class ExtensionalApplyRequest(BaseModel):
    k: int = Field(description="circle-union truncation level")
    i: int = Field(description="extension index")
    f: str = Field(description="function values file (JSON object or label,value CSV)")

class ExtensionalRowModel(BaseModel):
    i: int
    level: int
    norm: Value
    rank: int
    fixes_D: bool
    convex: bool
    commutes_next: Optional[bool] = None
    ledger_match: bool

class ExtensionalResponse(Response):
    k: int = 0
    passed: bool = False
    rows: List[ExtensionalRowModel] = []
    commutation_failures: List[List[int]] = []
    contraction_checks: int = 0
    contraction_failures: List[int] = []
    pair_cases: Dict[str, int] = {}

    def exit_code(self) -> int:
        return 1 if self.error or not self.passed else 0

    def table(self):
        columns = list(ExtensionalRowModel.model_fields)
        return columns, [[getattr(r, c) for c in columns] for r in self.rows]

class FunctionResponse(Response):
    values: Dict[str, Value] = {}
    lip: Optional[Value] = None

    def table(self):
        return ["label", "value"], [[k, v] for k, v in self.values.items()]

# ==================== EXPERIMENT MODELS ====================

class Lemma41ExperimentRequest(BaseModel):
    grid: str = Field("3,4,5,6", description="grid size or comma list")

class Thm32ExperimentRequest(BaseModel):
    n: int = Field(12, description="circle size")
    target: str = "auto"
    budget_nodes: Optional[int] = None
    budget_secs: Optional[float] = None

class UnionExperimentRequest(BaseModel):
    k: int = Field(2, description="circle-union truncation level")

class ExperimentReport(Response):
    experiment: str = ""
    inputs: Dict[str, Any] = {}
    columns: List[str] = []
    rows: List[List[Any]] = []
    passed: bool = False
    details: Dict[str, Any] = {}
    versions: Dict[str, str] = {}
    wall_time: float = 0.0

    def exit_code(self) -> int:
        if self.error:
            return 1
        if self.details.get("outcome") == "indeterminate":
            return 2
        return 0 if self.passed else 1

    def table(self):
        return self.columns, self.rows
