"""FastAPI application exposing the planning pipeline."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import service
from .errors import GraspMotionError
from .schemas import (
    CheckRequest,
    CheckResponse,
    IkRequest,
    IkResponse,
    PlanRequest,
    PlanResponse,
    SceneRequest,
    SceneResponse,
    SdfRequest,
    SdfResponse,
)

app = FastAPI(
    title="graspmotion",
    description="Joint motion and grasp planning over point-cloud scenes",
    version="0.1.0",
)


@app.exception_handler(GraspMotionError)
async def _domain_error(request: Request, exc: GraspMotionError):
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.exception_handler(ValueError)
async def _value_error(request: Request, exc: ValueError):
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/sdf", response_model=SdfResponse)
def build_sdf(req: SdfRequest) -> SdfResponse:
    return service.build_sdf_service(req)


@app.post("/ik", response_model=IkResponse)
def solve_ik(req: IkRequest) -> IkResponse:
    return service.ik_service(req)


@app.post("/plan", response_model=PlanResponse)
def plan(req: PlanRequest) -> PlanResponse:
    return service.plan_service(req)


@app.post("/check", response_model=CheckResponse)
def check(req: CheckRequest) -> CheckResponse:
    return service.check_service(req)


@app.post("/scenes", response_model=SceneResponse)
def generate_scene(req: SceneRequest) -> SceneResponse:
    return service.scene_service(req)
