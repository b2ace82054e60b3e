"""Run artifacts: step log, KML and GeoJSON tracks, JSON summary.

Everything is written deterministically so two exports of the same record
are byte-identical.
"""
from __future__ import annotations

import csv
import io
import json
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

from .engine import ConfigError, RunRecord, metrics
from .pursuit import mission_name
from .scenario import config_to_dict

FORMATS = ("csv", "kml", "geojson")

STEP_COLUMNS = (
    "time_s", "vessel_id", "lon_deg", "lat_deg", "speed_mps", "heading_deg",
    "ex_m", "ey_m", "e_theta_rad", "u_x", "u_y", "u_v", "u_theta",
    "captured", "critic_converged", "actor_converged",
)

FILE_NAMES = {
    "csv": "steps.csv",
    "kml": "tracks.kml",
    "geojson": "tracks.geojson",
    "summary": "summary.json",
}


def fmt(x: float) -> str:
    """Shortest positional decimal that reads back to the same double."""
    x = float(x)
    if x == 0.0:
        return "0.0"
    return np.format_float_positional(x, unique=True, trim="0")


def parse_formats(spec) -> list[str]:
    if isinstance(spec, str):
        spec = [s for s in (p.strip() for p in spec.split(",")) if s]
    out = []
    for f in spec:
        if f not in FORMATS:
            raise ConfigError("formats", f"unknown format {f!r} (choose from {', '.join(FORMATS)})")
        if f not in out:
            out.append(f)
    return out


def step_log(record: RunRecord) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STEP_COLUMNS)
    for s in record.snapshots:
        w.writerow([
            fmt(s.time), s.vessel_id, fmt(s.lon), fmt(s.lat), fmt(s.speed), fmt(s.heading),
            fmt(s.ex), fmt(s.ey), fmt(s.e_theta), fmt(s.u_x), fmt(s.u_y), fmt(s.u_v), fmt(s.u_theta),
            int(s.captured), int(s.critic_converged), int(s.actor_converged),
        ])
    return buf.getvalue()


def read_step_log(text: str) -> list[dict]:
    rows = []
    for r in csv.DictReader(io.StringIO(text)):
        row = {k: (v if k == "vessel_id" else float(v)) for k, v in r.items()}
        rows.append(row)
    return rows


def _tracks(record: RunRecord) -> list[dict]:
    cfg = record.config
    m = metrics(record)
    final_mission = {p.state.id: mission_name(p.mission) for p in cfg.pursuers}
    for e in record.timeline:
        if e.applied:
            final_mission[e.vessel] = e.mission
    out = []
    for vid in cfg.vessel_ids:
        rows = record.rows(vid)
        info = {"id": vid, "role": "evader" if vid == cfg.evader.id else "pursuer",
                "coords": [(r.lon, r.lat) for r in rows]}
        if vid != cfg.evader.id:
            info["mission"] = final_mission[vid]
            info["capture_time_s"] = m["pursuers"][vid]["capture_time_s"]
        out.append(info)
    return out


def kml(record: RunRecord) -> str:
    root = ET.Element("kml", xmlns="http://www.opengis.net/kml/2.2")
    doc = ET.SubElement(root, "Document")
    ET.SubElement(doc, "name").text = record.config.name or "run"
    for t in _tracks(record):
        pm = ET.SubElement(doc, "Placemark")
        ET.SubElement(pm, "name").text = t["id"]
        desc = [f"role: {t['role']}"]
        if t["role"] == "pursuer":
            desc.append(f"mission: {t['mission']}")
            ct = t["capture_time_s"]
            desc.append("captured: no" if ct is None else f"captured at {fmt(ct)} s")
        ET.SubElement(pm, "description").text = "; ".join(desc)
        ext = ET.SubElement(pm, "ExtendedData")
        for key in ("role", "mission", "capture_time_s"):
            if key in t:
                d = ET.SubElement(ext, "Data", name=key)
                v = t[key]
                ET.SubElement(d, "value").text = "" if v is None else (fmt(v) if isinstance(v, float) else str(v))
        ls = ET.SubElement(pm, "LineString")
        ET.SubElement(ls, "tessellate").text = "1"
        ET.SubElement(ls, "coordinates").text = " ".join(f"{fmt(lon)},{fmt(lat)},0" for lon, lat in t["coords"])
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def geojson(record: RunRecord) -> str:
    feats = []
    for t in _tracks(record):
        props = {k: v for k, v in t.items() if k != "coords"}
        feats.append({
            "type": "Feature",
            "properties": props,
            "geometry": {"type": "LineString", "coordinates": [[lon, lat] for lon, lat in t["coords"]]},
        })
    return json.dumps({"type": "FeatureCollection", "features": feats}, indent=1, sort_keys=True) + "\n"


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def summary(record: RunRecord) -> str:
    cfg = record.config
    m = metrics(record)
    body = {
        "scenario": cfg.name,
        "seed": cfg.seed,
        "metrics": m,
        "config": config_to_dict(cfg),
    }
    return json.dumps(_clean(body), indent=2, sort_keys=True) + "\n"


def export_run(record: RunRecord, formats, out_dir) -> list[Path]:
    """Write the requested artifacts plus ``summary.json``; return the paths."""
    fmts = parse_formats(formats)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    writers = {"csv": step_log, "kml": kml, "geojson": geojson}
    written = []
    for f in fmts:
        p = out / FILE_NAMES[f]
        p.write_text(writers[f](record), encoding="utf-8", newline="")
        written.append(p)
    p = out / FILE_NAMES["summary"]
    p.write_text(summary(record), encoding="utf-8", newline="")
    written.append(p)
    return written


__all__ = [
    "FILE_NAMES",
    "FORMATS",
    "STEP_COLUMNS",
    "export_run",
    "fmt",
    "geojson",
    "kml",
    "parse_formats",
    "read_step_log",
    "step_log",
    "summary",
]
