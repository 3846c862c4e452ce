"""HTTP service exposing learned weights, interactive scoring, and the graph.

The app is built around an immutable TrainedModel snapshot loaded once; no
request mutates shared state. Scoring goes through the same routine the
CLI uses, so both surfaces always return identical numbers.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, field_validator

from .constants import REFERRAL_THRESHOLD, TRADITIONAL_WEIGHTS
from .errors import ContractError
from .evaluation import normalize_weights, traditional_score
from .graph import graph_dump, round_significant
from .model import TrainedModel, score_attributes
from .validation import check_attr_values


class ScoreRequest(BaseModel):
    attrs: list[float]

    @field_validator("attrs")
    @classmethod
    def _check_attrs(cls, value):
        if len(value) != 7:
            raise ValueError(f"attrs must have exactly 7 entries, got {len(value)}")
        if any(not 0.0 <= v <= 1.0 for v in value):
            raise ValueError("attrs entries must lie in [0, 1]")
        return value


def build_score_response(model: TrainedModel, attrs) -> dict:
    """ScoreResponse body; shared by `score` on the CLI and POST /api/score."""
    attrs = check_attr_values(attrs, allow_probabilities=True)
    weights = normalize_weights(model.attribute_weights())
    wavg, probability = score_attributes(attrs, weights)
    integer_score = traditional_score((attrs >= 0.5).astype(float))
    return {
        "traditional_score": integer_score,
        "weighted_average": wavg,
        "melanoma_probability": probability,
        "referral": {
            "traditional": integer_score >= REFERRAL_THRESHOLD,
            "learned": probability >= model.threshold,
        },
        "weights_used": [float(w) for w in weights],
        "threshold_used": float(model.threshold),
    }


def create_app(model: TrainedModel) -> FastAPI:
    app = FastAPI(title="sevenpoint scoring service", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    art = model.artifacts
    graph_payload = round_significant(
        graph_dump(art.internal, art.external, art.combined, art.prox), 12
    )
    weights_payload = {
        "traditional": [int(w) for w in TRADITIONAL_WEIGHTS],
        "learned": [float(w) for w in normalize_weights(model.attribute_weights())],
        "threshold": float(model.threshold),
    }

    @app.exception_handler(RequestValidationError)
    async def _validation_to_400(request: Request, exc: RequestValidationError):
        errors = [
            {"field": ".".join(str(p) for p in err["loc"]), "message": err["msg"]}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"errors": errors})

    @app.get("/api/weights")
    async def get_weights():
        return weights_payload

    @app.post("/api/score")
    async def post_score(request: ScoreRequest):
        try:
            return build_score_response(model, np.array(request.attrs, dtype=float))
        except ContractError as exc:
            return JSONResponse(
                status_code=400, content={"errors": [{"field": "attrs", "message": str(exc)}]}
            )

    @app.get("/api/graph")
    async def get_graph():
        return graph_payload

    return app
