from pydantic import BaseModel, ConfigDict, Field


class GeometrySettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    # min singular value of Im tau must exceed NONDEGENERACY_RTOL * |tau|
    NONDEGENERACY_RTOL: float = Field(default=1e-8, gt=0)
    SYMMETRY_TOL: float = Field(default=1e-8, gt=0)
    NEWTON_TOL: float = Field(default=1e-12, gt=0)
    NEWTON_MAX_ITER: int = Field(default=50, ge=1)


GEOMETRY_SETTINGS = GeometrySettings()


class VerificationSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    ALGEBRAIC_TOLERANCE: float = Field(default=1e-9, ge=0)
    ORACLE_TOLERANCE: float = Field(default=1e-5, ge=0)
    ORACLE_STEP: float = Field(default=1e-3, gt=0)
    ORACLE_SUBSAMPLE: int = Field(default=25, ge=0)
    # oracle points need min_sv(Im tau)^2 >= ORACLE_CLEARANCE * h * |sigma|
    ORACLE_CLEARANCE: float = Field(default=30.0, ge=0)
    QUASI_RANDOM_SEED: int = 0


VERIFICATION_SETTINGS = VerificationSettings()


class ExportSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    OBJ_SIGNIFICANT_DIGITS: int = Field(default=9, ge=1, le=17)


EXPORT_SETTINGS = ExportSettings()
