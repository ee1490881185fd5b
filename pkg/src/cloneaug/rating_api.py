"""HTTP service for rating sessions (JSON API plus WAV streaming).

Endpoints:
    GET  /api/sessions                     session summaries
    GET  /api/sessions/{id}/tasks?rater=R  tasks with this rater's completion
    GET  /api/audio/{audio_id}             WAV bytes
    POST /api/ratings                      201 created / 409 duplicate / 404
    GET  /api/sessions/{id}/scores         combination scores
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException, Response
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .rating import (
    DuplicateRatingError,
    RatingCategory,
    RatingStore,
    UnknownTaskError,
)


class RatingSubmission(BaseModel):
    session_id: str
    task_id: str
    rater_id: str
    category: RatingCategory


def create_app(store: RatingStore, ui_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="cloneaug rating service")

    def _load_session(session_id: str):
        try:
            return store.load(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")

    @app.get("/api/sessions")
    def list_sessions() -> list[dict]:
        summaries = []
        for session_id in store.list_sessions():
            session = store.load(session_id)
            summaries.append(
                {
                    "session_id": session_id,
                    "num_tasks": len(session.tasks),
                    "combinations": session.combination_names,
                    "sample_size": session.sample_size,
                    "seed": session.seed,
                    "long_threshold_ratio": session.long_threshold_ratio,
                }
            )
        return summaries

    @app.get("/api/sessions/{session_id}/tasks")
    def session_tasks(session_id: str, rater: str = "") -> list[dict]:
        session = _load_session(session_id)
        completed = {
            record.task_id
            for record in store.records(session_id)
            if rater and record.rater_id == rater
        }
        return [
            {
                "task_id": task.task_id,
                "combination_name": task.combination_name,
                "audio_id": task.audio_id,
                "audio_url": f"/api/audio/{task.audio_id}",
                "audio_kind": task.audio_kind.value,
                "duration_class": task.duration_class.value,
                "duration": task.duration,
                "completed": task.task_id in completed,
            }
            for task in session.tasks
        ]

    @app.get("/api/audio/{audio_id}")
    def audio_bytes(audio_id: str) -> Response:
        for session_id in store.list_sessions():
            for task in store.load(session_id).tasks:
                if task.audio_id == audio_id:
                    if not task.wav_path.is_file():
                        raise HTTPException(
                            status_code=404, detail="audio file missing on disk"
                        )
                    return FileResponse(task.wav_path, media_type="audio/wav")
        raise HTTPException(status_code=404, detail="unknown audio id")

    @app.post("/api/ratings", status_code=201)
    def submit_rating(submission: RatingSubmission) -> dict:
        _load_session(submission.session_id)
        try:
            record = store.submit(
                submission.session_id,
                submission.task_id,
                submission.rater_id,
                submission.category,
            )
        except UnknownTaskError:
            raise HTTPException(status_code=404, detail="unknown task")
        except DuplicateRatingError:
            raise HTTPException(
                status_code=409, detail="task already rated by this rater"
            )
        return record.as_dict()

    @app.get("/api/sessions/{session_id}/scores")
    def session_scores(session_id: str) -> list[dict]:
        _load_session(session_id)
        return [score.as_dict() for score in store.scores(session_id)]

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
