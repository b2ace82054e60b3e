"""Regenerate the bundled scenario files.

Pursuers are placed at fixed great-circle distances and bearings from the
evader's start point, facing it. Run from the repo root:

    python3 tools/make_scenarios.py
"""
import math
from pathlib import Path

from vipursuit.engine import Malfunction, PursuerSpec, ScenarioConfig, ScheduledEvent, SetMission
from vipursuit.geo import GeodeticPosition, heading_to
from vipursuit.kinematics import ConstantCourse, VesselState, great_circle_step
from vipursuit.pursuit import Intercept, Surveil
from vipursuit.rl import LearnerConfig
from vipursuit.scenario import dump_scenario

OUT = Path(__file__).resolve().parents[1] / "src" / "vipursuit" / "scenarios"

# open water east of the Grand Banks
EVADER_START = GeodeticPosition.from_degrees(-45.0, 44.0)
EVADER_SPEED = 8.0
NORTHEAST = math.radians(45.0)
# smaller initial gains keep the surveillance loops from running away in speed
SURVEIL_LEARNER = LearnerConfig(init_scale=0.03, normalize=True)
INTERCEPT_LEARNER = LearnerConfig(init_scale=0.1, normalize=True)


def pursuer(vid, dist_m, bearing_deg, vmax, mission):
    # bearing is clockwise from north, as on a chart
    pos = great_circle_step(EVADER_START, math.pi / 2 - math.radians(bearing_deg), dist_m)
    return PursuerSpec(VesselState(vid, pos, 20.0, heading_to(pos, EVADER_START), vmax), mission)


def scenario(name, pursuers, events=(), header="", learner=SURVEIL_LEARNER):
    ev = VesselState("evader", EVADER_START, EVADER_SPEED, NORTHEAST, 10.0)
    cfg = ScenarioConfig(0, ev, ConstantCourse(NORTHEAST, EVADER_SPEED), pursuers, events,
                         learner=learner, name=name)
    return header + dump_scenario(cfg)


def main():
    s1 = scenario(
        "scenario-1",
        [
            pursuer("P1", 556e3, 200.0, 60.0, Intercept()),
            pursuer("P2", 367e3, 250.0, 60.0, Intercept()),
            pursuer("P3", 289e3, 300.0, 60.0, Intercept()),
        ],
        header="# Three pursuers intercept an evader heading northeast at constant speed.\n\n",
        learner=INTERCEPT_LEARNER,
    )
    surveil = [
        pursuer("P1", 744e3, 225.0, 80.0, Surveil(30e3)),
        pursuer("P2", 378e3, 160.0, 30.0, Intercept()),
        pursuer("P3", 289e3, 300.0, 60.0, Surveil(30e3)),
    ]
    s2 = scenario(
        "scenario-2",
        surveil,
        header="# P2 intercepts while P1 and P3 hold a 30 km surveillance standoff.\n\n",
    )
    s3 = scenario(
        "scenario-3",
        surveil,
        events=(
            ScheduledEvent(117 * 60.0, Malfunction("P2")),
            ScheduledEvent(180 * 60.0, SetMission("P1", Intercept())),
        ),
        header="# As scenario 2, but P2 breaks down and P1 is switched from surveillance to interception.\n\n",
    )
    for name, text in (("scenario1.toml", s1), ("scenario2.toml", s2), ("scenario3.toml", s3)):
        (OUT / name).write_text(text, encoding="utf-8")
        print("wrote", OUT / name)


if __name__ == "__main__":
    main()
