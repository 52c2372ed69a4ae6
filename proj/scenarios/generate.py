#!/usr/bin/env python3
"""Writes the shipped scenario files.

Every reference is a straight constant-speed cubic spline along l = 0 with a
0.2 s knot interval; for a uniform cubic spline the control point i sits at
the Greville time (i - 1) * dt, so s_i = v * (i - 1) * dt gives exactly
constant speed v over the whole domain.
"""
import json
import pathlib

HERE = pathlib.Path(__file__).resolve().parent
DT = 0.4

VEHICLE = {"wheelbase_m": 2.6, "max_steering_rad": 0.61, "width_m": 1.7, "length_m": 4.3}
# The fitting term is scaled up so that lambda_f = 0.01 still holds the
# refined curve on the deformed one at these knot intervals.
FITTING = {"samples": 32, "axial_weight": 1000.0, "radial_weight": 10000.0}
LIMITS = {"v_max_mps": 20.0, "a_max_mps2": 6.0, "j_max_mps3": 30.0}


def straight(speed, horizon):
    segments = round(horizon / DT)
    cps = [[speed * (i - 1) * DT, 0.0] for i in range(segments + 3)]
    return {"degree": 3, "knot_interval_s": DT, "t_start_s": 0.0, "control_points_m": cps}


def frame(t, s, l, half_len, half_wid):
    return {"t_s": t, "s_m": s, "l_m": l, "half_length_m": half_len, "half_width_m": half_wid}


def mover(oid, t1, s0, l0, vs, vl, half_len, half_wid):
    return {"id": oid, "static": False, "inflated": False,
            "frames": [frame(0.0, s0, l0, half_len, half_wid),
                       frame(t1, s0 + vs * t1, l0 + vl * t1, half_len, half_wid)]}


def base(name, description, speed, horizon):
    return {"schema_version": 1,
            "meta": {"name": name, "description": description},
            "reference": straight(speed, horizon),
            "vehicle": VEHICLE, "limits": LIMITS}


def crossing():
    # A crossing bus (1.0 m half extent along s, 6.0 m along l) drives across
    # the ego lane at 16 m/s. With the inflation its occupancy spans
    # s in [28.95, 35.45] and l_c - 8 < l < l_c + 8 with l_c = 16 (t - 3.1), so
    # it covers l = 0 for t in (2.6, 3.6). The ego (10 m/s) enters it just after
    # t = 2.9 s, which is the constructed TTC.
    h = 6.0
    sc = base("scenario1-crossing", "Straight road, one car crossing the ego lane", 10.0, h)
    sc["inflation"] = {"s_offset_m": 2.25, "l_offset_m": 2.0}
    sc["obstacles"] = [mover("crossing-bus", h, 32.2, -49.6, 0.0, 16.0, 1.0, 6.0)]
    sc["weights"] = {"lambda_s": 1.0, "lambda_c": 15.0, "lambda_d": 1.0, "lambda_f": 0.01,
                     "s_f_m": 1.0}
    sc["fitting"] = FITTING
    sc["search"] = {"delta_t_s": 0.4, "time_budget_s": 10.0}
    return sc


def road_damage():
    # Static road damage ahead in the ego lane, offset to the right, plus two
    # neighbours in the left lane travelling with the ego. The inflated damage
    # front edge is just before s = 16, so the TTC at 10 m/s is 1.6 s.
    h = 6.0
    sc = base("scenario2-road-damage", "Static road damage with two neighbours in the left lane",
              10.0, h)
    sc["inflation"] = {"s_offset_m": 8.0, "l_offset_m": 2.0}
    sc["obstacles"] = [
        {"id": "road-damage", "static": True, "inflated": False,
         "frames": [frame(0.0, 24.95, -1.2, 1.0, 1.0)]},
        mover("lead-left", h, 36.0, 3.5, 10.0, 0.0, 2.15, 0.85),
        mover("follow-left", h, -16.0, 3.5, 10.0, 0.0, 2.15, 0.85),
    ]
    sc["weights"] = {"lambda_s": 1.0, "lambda_c": 12.0, "lambda_d": 0.5, "lambda_f": 0.01,
                     "s_f_m": 1.3, "refinement": {"lambda_s": 1.0, "lambda_d": 10.0}}
    sc["fitting"] = FITTING
    sc["search"] = {"delta_t_s": 0.4, "time_budget_s": 10.0}
    return sc


def clear_road():
    sc = base("straight-clear", "Straight road, parked car well off the lane", 10.0, 5.0)
    sc["obstacles"] = [{"id": "parked", "static": True, "inflated": False,
                        "frames": [frame(0.0, 20.0, 8.0, 2.15, 0.85)]}]
    return sc


def start_in_collision():
    sc = base("start-in-collision", "Ego starts inside an inflated obstacle", 10.0, 5.0)
    sc["inflation"] = {"s_offset_m": 2.25, "l_offset_m": 2.0}
    sc["obstacles"] = [{"id": "blocker", "static": True, "inflated": False,
                        "frames": [frame(0.0, 1.0, 0.0, 2.15, 0.85)]}]
    return sc


def main():
    for fname, sc in [("scenario1_crossing.json", crossing()),
                      ("scenario2_road_damage.json", road_damage()),
                      ("straight_clear.json", clear_road()),
                      ("start_in_collision.json", start_in_collision())]:
        (HERE / fname).write_text(json.dumps(sc, indent=2) + "\n")


if __name__ == "__main__":
    main()
