"""Regenerate the bundled expression files in src/mgtheta/data/instances.

Vertex order follows the published event tables; weights follow the
positive-form (CSW) expressions.
"""
import json
from pathlib import Path

from mgtheta.ingest import expression_from_events, expression_to_document

CHSH = ["00|00", "11|01", "10|11", "00|10", "11|00", "00|01", "01|11", "11|10"]
PENT1 = ["00|00", "11|01", "10|11", "00|10", "11|00"]
PENT2 = ["00|00", "11|01", "10|11", "00|10", "_1|_0"]
PENT3 = ["00|00", "11|01", "10|11", "00|10", "11|20"]
I3_ORDER = [
    "00|00", "10|01", "20|00", "00|01", "11|00", "21|01",
    "01|00", "11|01", "22|00", "02|01", "12|00", "22|01",
    "00|11", "12|10", "20|11", "02|10", "11|11", "20|10",
    "01|11", "10|10", "22|11", "01|10", "12|11", "21|10",
]
I3_WEIGHTS = {
    "00|00": 2, "01|00": 1, "11|00": 2, "12|00": 1, "20|00": 1, "22|00": 2,
    "00|01": 2, "02|01": 1, "10|01": 1, "11|01": 2, "21|01": 1, "22|01": 2,
    "01|10": 1, "02|10": 2, "10|10": 2, "12|10": 1, "20|10": 1, "21|10": 2,
    "00|11": 2, "01|11": 1, "11|11": 2, "12|11": 1, "20|11": 1, "22|11": 2,
}
I3322 = [
    "11|22", "00|20", "10|22", "00|21", "01|22", "_1|_0", "_1|_1", "00|10",
    "10|11", "01|11", "1_|1_", "00|12", "11|11", "00|01", "1_|0_", "00|02",
]


def main() -> None:
    out = Path(__file__).resolve().parents[1] / "src" / "mgtheta" / "data" / "instances"
    out.mkdir(parents=True, exist_ok=True)
    instances = {
        "chsh": [(1, e) for e in CHSH],
        "pent1": [(1, e) for e in PENT1],
        "pent2": [(1, e) for e in PENT2],
        "pent3": [(1, e) for e in PENT3],
        "i3csw": [(I3_WEIGHTS[e], e) for e in I3_ORDER],
        "i3322csw": [(1, e) for e in I3322],
    }
    assert sorted(I3_ORDER) == sorted(I3_WEIGHTS)
    for name, events in instances.items():
        doc = expression_to_document(expression_from_events(events))
        (out / f"{name}.json").write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
