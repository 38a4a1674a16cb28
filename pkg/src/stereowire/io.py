"""Strict JSON file schemas for cameras, curves, annotations, reports, episodes.

Every loader rejects unknown fields by name. All numeric output is routed
through a 9-significant-digit formatter with a '.' decimal separator so
repeated runs produce byte-identical files regardless of locale.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .bspline import BSplineCurve, KnotVector
from .cameras import ProjectiveCamera
from .errors import ParseError, SchemaMismatch
from .metrics import Episode
from .spherical import SphericalChain


def format_float(x: float) -> float:
    """Round-trip a float through its 9-significant-digit decimal form."""
    return float(f"{float(x):.9g}")


def _round_floats(obj):
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(_round_floats(obj), indent=2) + "\n")


def _load(path) -> dict:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return obj


def _check_keys(obj: dict, required: tuple, optional: tuple, what: str) -> None:
    if not isinstance(obj, dict):
        raise ParseError(f"{what}: expected a JSON object")
    for key in obj:
        if key not in required and key not in optional:
            raise ParseError(f"{what}: unknown field '{key}'")
    for key in required:
        if key not in obj:
            raise ParseError(f"{what}: missing field '{key}'")


def _matrix(value, shape, what: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what}: not numeric") from exc
    if arr.shape != shape:
        raise ParseError(f"{what}: expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{what}: non-finite values")
    return arr


# --- camera files ---

def camera_to_dict(cam: ProjectiveCamera) -> dict:
    return {"P": cam.P.tolist(), "image_size": list(cam.image_size)}


def save_camera(cam: ProjectiveCamera, path) -> None:
    dump_json(camera_to_dict(cam), path)


def load_camera(path) -> ProjectiveCamera:
    obj = _load(path)
    _check_keys(obj, ("P", "image_size"), (), f"camera file {path}")
    P = _matrix(obj["P"], (3, 4), f"camera file {path}: P")
    size = obj["image_size"]
    if not (isinstance(size, list) and len(size) == 2):
        raise ParseError(f"camera file {path}: image_size must be [w, h]")
    return ProjectiveCamera(P, (int(size[0]), int(size[1])))


# --- curve files ---

def curve_to_dict(curve: BSplineCurve) -> dict:
    return {
        "degree": curve.degree,
        "knots": curve.knots.knots.tolist(),
        "control_points": curve.control_points.tolist(),
    }


def save_curve(curve: BSplineCurve, path) -> None:
    dump_json(curve_to_dict(curve), path)


def curve_from_dict(obj: dict, what: str) -> BSplineCurve:
    _check_keys(obj, ("degree", "knots", "control_points"), (), what)
    if not isinstance(obj["degree"], int):
        raise ParseError(f"{what}: degree must be an integer")
    knots = np.asarray(obj["knots"], dtype=float)
    cp = np.asarray(obj["control_points"], dtype=float)
    if cp.ndim != 2 or cp.shape[1] not in (2, 3):
        raise ParseError(f"{what}: control points must be 2D or 3D")
    try:
        return BSplineCurve(cp, KnotVector(knots, obj["degree"]))
    except ValueError as exc:
        raise ParseError(f"{what}: {exc}") from exc


def load_curve(path) -> BSplineCurve:
    obj = _load(path)
    if isinstance(obj, dict) and ("tip" in obj or "goal" in obj):
        raise SchemaMismatch(f"{path}: looks like an episode file, expected a curve")
    return curve_from_dict(obj, f"curve file {path}")


# --- annotation polylines (CVAT-style export) ---

def save_annotation(points: np.ndarray, camera: str, frame: int, path) -> None:
    dump_json({"frame": int(frame), "camera": camera,
               "points": np.asarray(points, dtype=float).tolist()}, path)


def load_annotation(path) -> tuple[int, str, np.ndarray]:
    obj = _load(path)
    _check_keys(obj, ("frame", "camera", "points"), (), f"annotation file {path}")
    if not isinstance(obj["frame"], int):
        raise ParseError(f"annotation file {path}: frame must be an integer")
    if obj["camera"] not in ("A", "B"):
        raise ParseError(f"annotation file {path}: camera must be 'A' or 'B'")
    pts = np.asarray(obj["points"], dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ParseError(f"annotation file {path}: points must be an Nx2 list, N >= 2")
    if not np.all(np.isfinite(pts)):
        raise ParseError(f"annotation file {path}: non-finite points")
    return obj["frame"], obj["camera"], pts


# --- spherical chains ---

def save_chain(chain: SphericalChain, path) -> None:
    dump_json({"tip": chain.tip.tolist(), "r": chain.r,
               "offsets": chain.offsets.tolist()}, path)


def load_chain(path) -> SphericalChain:
    obj = _load(path)
    _check_keys(obj, ("tip", "r", "offsets"), (), f"chain file {path}")
    tip = _matrix(obj["tip"], (3,), f"chain file {path}: tip")
    if not (isinstance(obj["r"], (int, float)) and obj["r"] > 0):
        raise ParseError(f"chain file {path}: r must be a positive number")
    offsets = np.asarray(obj["offsets"], dtype=float)
    if offsets.size and (offsets.ndim != 2 or offsets.shape[1] != 2):
        raise ParseError(f"chain file {path}: offsets must be an Nx2 list")
    return SphericalChain(tip=tip, r=float(obj["r"]),
                          offsets=offsets if offsets.size else np.zeros((0, 2)))


# --- reconstruction reports ---

def save_report(frame: int, accepted: bool, mean_reproj_px: float,
                curve: BSplineCurve, path) -> None:
    dump_json({
        "frame": int(frame),
        "accepted": bool(accepted),
        "mean_reproj_px": float(mean_reproj_px),
        "curve": curve_to_dict(curve),
    }, path)


def load_report(path) -> dict:
    obj = _load(path)
    _check_keys(obj, ("frame", "accepted", "mean_reproj_px", "curve"), (),
                f"report file {path}")
    curve = curve_from_dict(obj["curve"], f"report file {path}: curve")
    return {"frame": obj["frame"], "accepted": bool(obj["accepted"]),
            "mean_reproj_px": float(obj["mean_reproj_px"]), "curve": curve}


# --- episodes ---

def episode_to_dict(ep: Episode) -> dict:
    out = {
        "tip": ep.tip_positions.tolist(),
        "forces": ep.forces.tolist(),
        "goal": ep.goal.tolist(),
        "success": ep.success,
    }
    if ep.max_steps is not None:
        out["max_steps"] = int(ep.max_steps)
    return out


def save_episodes(episodes: list[Episode], path) -> None:
    dump_json([episode_to_dict(ep) for ep in episodes], path)


def _episode_from_dict(obj: dict, what: str) -> Episode:
    _check_keys(obj, ("tip", "forces", "goal", "success"), ("max_steps",), what)
    tips = np.asarray(obj["tip"], dtype=float)
    if tips.ndim != 2 or tips.shape[1] != 3 or tips.shape[0] < 1:
        raise ParseError(f"{what}: tip must be an Nx3 list, N >= 1")
    forces = np.asarray(obj["forces"], dtype=float)
    if forces.size and (forces.ndim != 2 or forces.shape[1] != 3):
        raise ParseError(f"{what}: forces must be an Nx3 list")
    goal = _matrix(obj["goal"], (3,), f"{what}: goal")
    if not isinstance(obj["success"], bool):
        raise ParseError(f"{what}: success must be a boolean")
    try:
        return Episode(tip_positions=tips, forces=forces if forces.size else np.zeros((0, 3)),
                       goal=goal, success=obj["success"], max_steps=obj.get("max_steps"))
    except ValueError as exc:
        raise ParseError(f"{what}: {exc}") from exc


def load_episodes(path) -> list[Episode]:
    obj = _load(path)
    if isinstance(obj, dict) and "control_points" in obj:
        raise SchemaMismatch(f"{path}: looks like a curve file, expected episodes")
    items = obj if isinstance(obj, list) else [obj]
    if not items:
        raise ParseError(f"{path}: empty episode list")
    return [_episode_from_dict(item, f"episode file {path}[{i}]")
            for i, item in enumerate(items)]
