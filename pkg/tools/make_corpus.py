"""Regenerate the bundled action files in src/aplab/data."""

from fractions import Fraction as F
from pathlib import Path

from aplab.actionfile import parse_action, serialize_action
from aplab.displacement_normalization import normalize_action
from aplab.group_action import GroupAction, extend_interval_action
from aplab.pl_homeo import PLHomeo

DATA = Path(__file__).resolve().parents[1] / "src" / "aplab" / "data"

HAND = {
    "translations.act": """action translations
gen a affine 1 1
gen a- affine 1 -1
inv a a-
""",
    "bs12.act": """action bs12
gen a affine 1 1
gen a- affine 1 -1
gen b affine 2 0
gen b- affine 1/2 0
inv a a-
inv b b-
rel b a b- a- a-
""",
    "raw-bs12.act": """action raw-bs12
gen a affine 1 1
gen b affine 2 0
rel b a b- a- a-
""",
    "fixed-point.act": """action fixed-point
gen b affine 2 0
gen b- affine 1/2 0
inv b b-
""",
    "free-pl.act": """action free-pl
gen a pl ltail 1 pts 0 1 ; 1 3 rtail 1
gen b pl ltail 1 pts 0 0 ; 3 1/2 ; 4 4 rtail 1
""",
}


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    for name, text in HAND.items():
        A = parse_action(text)
        (DATA / name).write_text(serialize_action(A), encoding="utf-8")
    f = PLHomeo([(0, 0), (F(1, 2), F(37, 80)), (1, 1)], 1, 1)
    ext = extend_interval_action(GroupAction("interval-ext", {"f": f}))
    (DATA / "interval-ext.act").write_text(serialize_action(ext), encoding="utf-8")
    bs = parse_action(HAND["bs12.act"])
    res = normalize_action(bs, 16)
    rho = res.action.with_generators(res.action.generators, name="bs12-normalized")
    (DATA / "bs12-normalized.act").write_text(serialize_action(rho), encoding="utf-8")


if __name__ == "__main__":
    main()
