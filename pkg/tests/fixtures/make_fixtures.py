"""Regenerate the pass and scenario fixtures in this directory.

The outputs are committed; rerun only when deliberately changing a fixture,
then refresh the golden files with ``tests/golden/make_golden.py``.
"""
import json
import os

from cvqkdnet.passes import format_pass_profile, synthetic_pass

HERE = os.path.dirname(os.path.abspath(__file__))

PASSES = {
    # ISS over an OGS at 1.029 km: 663 s pass peaking at 87.6 deg.
    "iss_downlink.csv": dict(peak_elevation_deg=87.6, duration_s=663.0),
    # DSN-like passes with Keplerian durations.
    "dsn_madrid_uplink.csv": dict(peak_elevation_deg=75.0),
    "dsn_canberra_downlink.csv": dict(peak_elevation_deg=58.0),
    "dsn_goldstone_downlink.csv": dict(peak_elevation_deg=70.0),
}

DOWNLINK_OPTICS = {"tx_diameter": 0.3, "rx_diameter": 1.0}
UPLINK_OPTICS = {"tx_diameter": 1.0, "rx_diameter": 0.3}

DSN = {
    "madrid": [40.4314, -4.2481],
    "goldstone": [35.4267, -116.89],
    "canberra": [-35.4014, 148.9817],
}


def satground(direction, ogs_altitude_km=0.0, **extra):
    optics = DOWNLINK_OPTICS if direction == "downlink" else UPLINK_OPTICS
    spec = {
        "type": "satellite_ground",
        "direction": direction,
        "altitude_km": 408,
        "ogs_altitude_km": ogs_altitude_km,
        "atmosphere": "good_atmosphere",
        "optics": optics,
    }
    spec.update(extra)
    return spec


SCENARIOS = {
    "iss_capacity.json": {
        "description": "ISS downlink to a 1.029 km OGS, MD reconciliation, beta 0.9",
        "protocol": {"modulation_variance": 5, "excess_noise": 0.03, "reconciliation": "MD", "beta": 0.9},
        "channel": satground("downlink", 1.029),
        "capacity": {"pass_file": "passes/iss_downlink.csv", "altitude_km": 408, "bin_deg": 1},
    },
    "dsn_uplink.json": {
        "description": "DSN-like uplink pass, MD reconciliation",
        "protocol": {"reconciliation": "MD"},
        "channel": satground("uplink"),
        "capacity": {"pass_file": "passes/dsn_madrid_uplink.csv"},
    },
    "dsn_downlink.json": {
        "description": "DSN-like downlink pass, MD reconciliation",
        "protocol": {"reconciliation": "MD"},
        "channel": satground("downlink"),
        "capacity": {"pass_file": "passes/dsn_goldstone_downlink.csv"},
    },
    "fibre_md.json": {
        "protocol": {"reconciliation": "MD", "beta_form": "exponential"},
        "channel": {"type": "fibre"},
        "sweep": {"start": 0, "stop": 300, "step": 1},
    },
    "fibre_empty.json": {
        "channel": {"type": "fibre"},
        "sweep": {"values": []},
    },
    "underwater_md.json": {
        "protocol": {"reconciliation": "MD", "beta_form": "exponential"},
        "channel": {"type": "underwater", "water": "table5_pure_sea_water"},
        "sweep": {"start": 0, "stop": 200, "step": 1},
    },
    "intersat_md.json": {
        "protocol": {"reconciliation": "MD", "beta_form": "exponential"},
        "channel": {"type": "inter_satellite", "receiver_radius": 0.2, "beam_waist": 0.2},
        "sweep": {"start": 10, "stop": 2000, "step": 10},
    },
    "intersat_mlc.json": {
        "protocol": {"reconciliation": "MLC_MSD", "beta_form": "exponential"},
        "channel": {"type": "inter_satellite", "receiver_radius": 0.2, "beam_waist": 0.2},
        "sweep": {"start": 10, "stop": 2000, "step": 10},
    },
    "downlink_elevation.json": {
        "protocol": {"reconciliation": "MD"},
        "channel": satground("downlink", 1.029),
        "sweep": {"start": 1, "stop": 90, "step": 1},
    },
    "chain_madrid_goldstone.json": {
        "chain": {
            "endpoints": [DSN["madrid"], DSN["goldstone"]],
            "sat_altitude_km": 408,
            "link_km": 1000,
            "required_capacity_bits": 3.71e6,
            "intersat_skr_bps": 3000e6,
        }
    },
    "chain_madrid_canberra.json": {
        "chain": {
            "endpoints": [DSN["madrid"], DSN["canberra"]],
            "sat_altitude_km": 408,
            "link_km": 1000,
            "required_capacity_bits": 3.71e6,
            "intersat_skr_bps": 3000e6,
        }
    },
    "chain_short.json": {
        "chain": {
            "ground_angle_deg": 5,
            "link_km": 1000,
            "required_capacity_bits": 3.71e6,
            "intersat_skr_bps": 3000e6,
        }
    },
}


def six_node_graph():
    """OGS 1, satellites 2 and 4, submarine 3, OGS 5 and 6.

    Candidate pathways 1 -> 3 go through satellite 2 or OGS 6; 3 -> 5 goes
    direct or through satellite 4.
    """
    def pass_capacity(pass_file, direction):
        return {"pass": {"pass_file": pass_file, "start_s": 0, "link": satground(direction)}}

    return {
        "description": "six-node mixed network, key from OGS 1 via submarine 3 to OGS 5",
        "protocol": {"reconciliation": "MD"},
        "graph": {
            "nodes": [
                {"id": "1", "kind": "OGS", "position": [40.43, -4.25, 0.0]},
                {"id": "2", "kind": "satellite", "trajectory": [[0, 40.0, -4.0, 408.0]]},
                {"id": "3", "kind": "submarine", "trajectory": [[0, 38.0, -10.0, -0.1]]},
                {"id": "4", "kind": "satellite", "trajectory": [[0, 36.0, -20.0, 408.0]]},
                {"id": "5", "kind": "OGS", "position": [35.43, -116.89, 1.0]},
                {"id": "6", "kind": "OGS", "position": [38.72, -9.14, 0.1]},
            ],
            "links": [
                {
                    "id": "L12",
                    "a": "1",
                    "b": "2",
                    "capacity": pass_capacity("passes/dsn_madrid_uplink.csv", "uplink"),
                    "reverse_capacity": pass_capacity("passes/dsn_madrid_uplink.csv", "downlink"),
                },
                {"id": "L16", "a": "1", "b": "6", "capacity": {"rate_bps": 5e4}},
                {"id": "L63", "a": "6", "b": "3", "capacity": {"windows": [[0, 700, 2.0e7]]}},
                {
                    "id": "L23",
                    "a": "2",
                    "b": "3",
                    "capacity": {"windows": [[100, 400, 4.0e7]]},
                    "reverse_capacity": {"windows": [[100, 400, 2.5e7]]},
                },
                {"id": "L24", "a": "2", "b": "4", "capacity": {"rate_bps": 3.0e6}},
                {
                    "id": "L43",
                    "a": "4",
                    "b": "3",
                    "capacity": {"windows": [[0, 600, 2.8e7]]},
                    "reverse_capacity": {"windows": [[0, 600, 3.0e7]]},
                },
                {
                    "id": "L45",
                    "a": "4",
                    "b": "5",
                    "capacity": pass_capacity("passes/dsn_goldstone_downlink.csv", "downlink"),
                    "reverse_capacity": pass_capacity("passes/dsn_goldstone_downlink.csv", "uplink"),
                },
                {"id": "L35", "a": "3", "b": "5", "family": "submarine_ground", "capacity": {"windows": [[0, 700, 1.0e7]]}},
            ],
        },
        "route": {"window": [0, 700], "targets": ["1", "3", "5"], "key_size_bits": 3.7e6},
    }


def main():
    os.makedirs(os.path.join(HERE, "passes"), exist_ok=True)
    for name, kwargs in PASSES.items():
        profile = synthetic_pass(altitude_km=408.0, **kwargs)
        with open(os.path.join(HERE, "passes", name), "w", encoding="utf-8", newline="") as fh:
            fh.write(format_pass_profile(profile))
    scenarios = dict(SCENARIOS)
    scenarios["six_node_route.json"] = six_node_graph()
    for name, doc in scenarios.items():
        with open(os.path.join(HERE, name), "w", encoding="utf-8", newline="") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")


if __name__ == "__main__":
    main()
