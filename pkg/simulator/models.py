"""
Pydantic models for simulator configuration and result records
"""
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import List, Literal, Optional, Tuple, Union

SCHEMES = ("sa-ssca", "low-complexity", "channel-power-max", "random", "instantaneous")

Position = Tuple[float, float, float]


def _dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def _parse_float_list(value):
    """Accept "1,2,3" strings from flat config files."""
    if isinstance(value, str):
        parts = [p.strip() for p in value.split(",") if p.strip()]
        return [float(p) for p in parts]
    return value


# Scenario constants
class SystemConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_s: int = Field(2, ge=1, description="Antenna count at the BS")
    n_r: int = Field(16, ge=1, description="RIS element count")
    m: int = Field(4, ge=1, description="Energy user count")
    pt_dbm: float = Field(45.0, description="BS power budget (dBm)")
    noise_iu_dbm: float = Field(-80.0, description="Noise power at the IU (dBm)")
    noise_eu_dbm: float = Field(-80.0, description="Noise power at each EU (dBm)")
    eps_uw: float = Field(2.0, ge=0.0, description="Minimum RF receive power per EU (uW)")
    p_smooth: float = Field(4.0, gt=0.0, description="Log-sum-exp smoothing exponent p")
    rician_bs_user_db: float = Field(0.0, description="Rician factor of BS-user links (dB)")
    rician_ris_db: float = Field(3.0, description="Rician factor of RIS links (dB)")
    c0_db: float = Field(-30.0, description="Path loss at the reference distance (dB)")
    d0_m: float = Field(1.0, gt=0.0, description="Reference distance (m)")
    alpha_br: float = Field(2.2, description="Path-loss exponent BS-RIS")
    alpha_bi: float = Field(3.6, description="Path-loss exponent BS-IU")
    alpha_ri: float = Field(2.2, description="Path-loss exponent RIS-IU")
    alpha_be: float = Field(3.6, description="Path-loss exponent BS-EU")
    alpha_re: float = Field(2.2, description="Path-loss exponent RIS-EU")
    bs_pos: Position = Field((6.0, 0.0, 0.0), description="BS reference point (m)")
    ris_pos: Position = Field((0.0, 2.5, 3.0), description="RIS reference point (m)")
    iu_pos: Position = Field((6.0, 200.0, 0.0), description="IU position (m)")
    eu_radius_m: float = Field(5.0, gt=0.0, description="Radius of the EU circle around the BS (m)")
    q_bits: int = Field(0, ge=0, description="Phase quantization bits (0 = continuous)")

    @field_validator("bs_pos", "ris_pos", "iu_pos", mode="before")
    @classmethod
    def _parse_position(cls, value):
        return _parse_float_list(value)

    @property
    def pt_w(self) -> float:
        return _dbm_to_watt(self.pt_dbm)

    @property
    def noise_iu_w(self) -> float:
        return _dbm_to_watt(self.noise_iu_dbm)

    @property
    def noise_eu_w(self) -> float:
        return _dbm_to_watt(self.noise_eu_dbm)

    @property
    def eps_w(self) -> float:
        return self.eps_uw * 1e-6

    @property
    def c0(self) -> float:
        return 10.0 ** (self.c0_db / 10.0)


# Experiment orchestration
class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    system: SystemConfig = Field(default_factory=SystemConfig)
    scheme: Literal["sa-ssca", "low-complexity", "channel-power-max", "random", "instantaneous"] = "sa-ssca"
    t_f: int = Field(300, ge=1, description="Frames per super-frame")
    t_s: int = Field(4, ge=1, description="Slots per frame")
    t_c: int = Field(4, ge=1, description="Channel samples per frame for the long-term update")
    n_realizations: int = Field(20, ge=1, description="Monte Carlo super-frames")
    tau: Optional[float] = Field(None, gt=0.0, description="Surrogate proximal weight (None = set from the first gradient)")
    rho_exponent: float = Field(0.6, gt=0.0, lt=1.0)
    gamma_exponent: float = Field(0.9, gt=0.0, le=1.0)
    theta_init: Literal["pi", "random", "warm"] = "pi"
    discrete_feedback: bool = Field(False, description="Feed projected phases back into the SSCA state")
    max_outer_iters: int = Field(30, ge=1, description="CCCP-BCD iterations J")
    obj_tol: float = Field(1e-6, gt=0.0)
    solver_tol: float = Field(1e-7, gt=0.0)
    n_stat_samples: int = Field(500, ge=1, description="Samples for the statistical matrix and weight a")
    heuristic_method: Literal["bcd", "pdd"] = "bcd"
    inst_rounds: int = Field(5, ge=0, description="Alternation rounds of the instantaneous-CSI scheme")
    inst_pg_steps: int = Field(20, ge=1, description="Phase gradient steps per round")
    csi_delay_ms: float = Field(0.0, ge=0.0)
    doppler_hz: float = Field(0.0, ge=0.0)
    stat_error_db: Optional[float] = Field(None, description="Statistical CSI error b in dB (None = perfect)")
    x_mo_m: float = Field(0.0, ge=0.0, description="IU displacement along x (m)")
    mobility_stats: Literal["outdated", "updated"] = "outdated"
    sweep_param: Optional[str] = None
    sweep_values: Optional[List[float]] = None
    seed: int = Field(0, ge=0)
    out_dir: Optional[str] = None
    record_wall_time: bool = Field(False, description="Write elapsed seconds into wall_s")

    @field_validator("stat_error_db", "sweep_param", "out_dir", "tau", mode="before")
    @classmethod
    def _empty_to_none(cls, value):
        if isinstance(value, str) and value.strip().lower() in ("", "none", "auto"):
            return None
        return value

    @field_validator("sweep_values", mode="before")
    @classmethod
    def _parse_values(cls, value):
        return _parse_float_list(value)

    @model_validator(mode="after")
    def _check_sweep(self):
        if self.sweep_values is not None and len(self.sweep_values) == 0:
            raise ValueError("sweep_values must be nonempty")
        return self

    @property
    def stat_error_linear(self) -> float:
        if self.stat_error_db is None:
            return 0.0
        return 10.0 ** (self.stat_error_db / 10.0)


# One CSV row
class RunRecord(BaseModel):
    scheme: str
    param: str = Field("none", description="Swept parameter name")
    value: Optional[Union[float, str]] = Field(None, description="Swept parameter value")
    rate_bps_hz: float = Field(..., ge=0.0, description="Average worst-case secrecy rate")
    stderr: float = Field(..., ge=0.0)
    n_slots: int = Field(..., ge=1, description="Evaluated slots, dropped ones included")
    n_dropped: int = Field(0, ge=0, description="Slots dropped as infeasible")
    seed: int
    wall_s: float = 0.0

    @property
    def failed(self) -> bool:
        return self.n_dropped >= self.n_slots


RUN_COLUMNS = list(RunRecord.model_fields.keys())
