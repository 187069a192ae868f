from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import ORJSONResponse
from pydantic import BaseModel, Field
from typing import Optional, List, Dict, Any
from concurrent.futures import ThreadPoolExecutor
from dotenv import load_dotenv
import logging

from config import get_log_level, get_thread_count, get_tolerance
from errors import ConstraintViolation, ContractViolation, UnknownFamily
from family_factory import SolutionFamilyFactory
from geometry import GEOMETRY_TOL
from multivector import Signature
from radial import RadialParams, RadialState
from reports import Report, ReportSummary
from spinors import BILINEAR, HERMITIAN
from suites import algebra_checks, ode_entries, run_suite, squares_checks

__version__ = "0.1.0"

# Load environment variables
load_dotenv()

# Setup logging
logging.basicConfig(level=get_log_level())
logger = logging.getLogger(__name__)

# Initialize FastAPI app
# ORJSONResponse writes non-finite residuals as null
app = FastAPI(title="Spinform Verification Engine", version=__version__, default_response_class=ORJSONResponse)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

family_factory = SolutionFamilyFactory()


# Request/Response models
class AlgebraRequest(BaseModel):
    p: int
    q: int
    samples: int = Field(default=100, ge=1)
    seed: int = 0
    tol: Optional[float] = None


class SquaresRequest(BaseModel):
    p: int
    q: int
    ell: Optional[int] = None
    s: int = 1
    kind: str = "both"  # hermitian, bilinear or both
    samples: int = Field(default=100, ge=1)
    seed: int = 0
    tol: Optional[float] = None


class VerifyRequest(BaseModel):
    family: str
    params: Dict[str, Any] = Field(default_factory=dict)
    points: int = Field(default=100, ge=1)
    tol: float = GEOMETRY_TOL
    seed: int = 0
    perturb: Dict[str, float] = Field(default_factory=dict)


class OdeRequest(BaseModel):
    lambda_: float
    e: float
    c: float = 1.0
    m1: float = 0.0
    m2: float = 0.0
    rho_star: float = -1.0
    F0: Optional[float] = None
    r0: Optional[float] = None
    r1: Optional[float] = None
    step: float = Field(default=1e-3, gt=0)


class OdeResponse(BaseModel):
    report: Report
    trajectory: List[RadialState]


class FamilyInfo(BaseModel):
    id: str
    description: str
    defaults: Dict[str, Any]
    perturbations: List[str]


def _run(checks, seed: int, params: Dict[str, Any]):
    threads = get_thread_count()
    if threads == 1:
        return run_suite(checks, seed, params)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return run_suite(checks, seed, params, executor=pool)


def _report(command: str, seed: int, entries, artifacts: Optional[Dict[str, Any]] = None) -> Report:
    return Report(entries=entries, summary=ReportSummary.of(command, seed, entries), artifacts=artifacts or {})


@app.get("/api/health")
async def health_check():
    """Health check endpoint."""
    try:
        threads = get_thread_count()
    except ContractViolation as e:
        raise HTTPException(status_code=500, detail=str(e))
    return {"status": "healthy", "version": __version__, "threads": threads}


@app.get("/api/families", response_model=List[FamilyInfo])
async def get_families():
    """List the registered solution families with their default parameters."""
    return family_factory.get_available_families()


@app.post("/api/algebra", response_model=Report)
def run_algebra(request: AlgebraRequest):
    """Run the exterior algebra invariant suite for one signature."""
    try:
        sig = Signature(request.p, request.q)
        tol = get_tolerance() if request.tol is None else request.tol
        checks = algebra_checks(sig, request.samples, tol)
        entries = _run(checks, request.seed, {"p": request.p, "q": request.q, "samples": request.samples})
        return _report("algebra", request.seed, entries)
    except ContractViolation as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error running algebra suite: {e}")
        raise HTTPException(status_code=500, detail=str(e))


@app.post("/api/squares", response_model=Report)
def run_squares(request: SquaresRequest):
    """Run representation, pairing and squaring checks for one signature."""
    try:
        if request.kind not in (HERMITIAN, BILINEAR, "both"):
            raise ContractViolation(f"kind must be hermitian, bilinear or both, got {request.kind!r}")
        sig = Signature(request.p, request.q)
        tol = get_tolerance() if request.tol is None else request.tol
        kinds = (HERMITIAN, BILINEAR) if request.kind == "both" else (request.kind,)
        checks = squares_checks(sig, kinds, request.samples, tol, ell=request.ell, s=request.s)
        params = request.model_dump(exclude={"seed", "tol"})
        return _report("squares", request.seed, _run(checks, request.seed, params))
    except ContractViolation as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error running squares suite: {e}")
        raise HTTPException(status_code=500, detail=str(e))


@app.post("/api/verify", response_model=Report)
def verify_family(request: VerifyRequest):
    """Run the residual suite of a named solution family."""
    try:
        checks = family_factory.build_checks(
            request.family, request.params, request.points, request.tol, request.perturb
        )
        return _report("verify", request.seed, _run(checks, request.seed, {}))
    except UnknownFamily as e:
        raise HTTPException(status_code=404, detail=str(e))
    except ContractViolation as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error verifying family {request.family}: {e}")
        raise HTTPException(status_code=500, detail=str(e))


@app.post("/api/ode", response_model=OdeResponse)
def integrate_ode(request: OdeRequest):
    """Integrate the radial system and return the report plus the trajectory."""
    try:
        params = RadialParams(
            lam=request.lambda_, e=request.e, c=request.c,
            m1=request.m1, m2=request.m2, rho_star=request.rho_star,
        )
        entries, trajectory = ode_entries(params, request.r0, request.r1, request.step, request.F0)
        report = _report("ode", 0, entries, {"trajectory_points": len(trajectory.r)})
        return OdeResponse(report=report, trajectory=trajectory.records())
    except ConstraintViolation as e:
        raise HTTPException(status_code=422, detail=str(e))
    except ContractViolation as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error integrating radial system: {e}")
        raise HTTPException(status_code=500, detail=str(e))


if __name__ == "__main__":
    import uvicorn
    from config import get_api_address

    host, port = get_api_address()
    uvicorn.run(app, host=host, port=port)
