import logging
import time
from typing import Optional

from fastapi import FastAPI, Form
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from dimer_cli import (
    build_deform_report,
    build_mirror_report,
    build_polygons_report,
    build_validate_report,
    error_report,
)
from errors import EXIT_CAP, EXIT_VALIDATION, EXIT_VIOLATION, DimerMirrorError, exit_code_for
from settings import get_settings, setup_logging

setup_logging()
logger = logging.getLogger(__name__)

app = FastAPI(title="dimer-mirror")
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# HTTP status per CLI exit code
_HTTP_STATUS = {EXIT_VALIDATION: 422, EXIT_CAP: 507, EXIT_VIOLATION: 409}


def _respond(command, builder, *args):
    started = time.time()
    logger.info(f"========== {command} ==========")
    try:
        report = builder(*args)
    except DimerMirrorError as e:
        logger.warning(f"✗ {command} failed: {e.qualified_code}")
        status = _HTTP_STATUS.get(exit_code_for(e), 400)
        return JSONResponse(status_code=status, content=error_report(command, e).model_dump())
    logger.info(f"✓ {command} completed with status {report.status} in {time.time() - started:.2f}s")
    return report.model_dump()


@app.post("/validate")
async def validate(dimer: str = Form(...), depth: int = Form(8)):
    """Parse a dimer (built-in name, Q<M> or file text) and classify it."""
    return _respond("validate", build_validate_report, dimer, depth)


@app.post("/deform")
async def deform(dimer: str = Form(...), order: Optional[int] = Form(None)):
    order = order if order is not None else get_settings().default_order
    return _respond("deform", build_deform_report, dimer, order)


@app.post("/polygons")
async def polygons(dimer: str = Form(...), order: Optional[int] = Form(None)):
    order = order if order is not None else get_settings().default_order
    return _respond("polygons", build_polygons_report, dimer, order)


@app.post("/mirror")
async def mirror(dimer: str = Form(...), arc: str = Form(...), order: Optional[int] = Form(None)):
    order = order if order is not None else get_settings().default_order
    return _respond("mirror", build_mirror_report, dimer, arc, order)
