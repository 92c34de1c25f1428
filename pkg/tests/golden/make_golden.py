"""Freeze CLI outputs for the cases in cases.json.

File arguments are relative to tests/fixtures. Output files hold stdout
followed by ``# exit <code>``.
"""
import io
import json
import os

from cvqkdnet.cli import run

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(os.path.dirname(HERE), "fixtures")


FILE_FLAGS = ("--scenario", "--pass")


def resolve(args):
    return [os.path.join(FIXTURES, a) if prev in FILE_FLAGS else a for prev, a in zip([None] + args, args)]


def render(args):
    out, err = io.StringIO(), io.StringIO()
    code = run(resolve(args), stdout=out, stderr=err)
    return out.getvalue() + f"# exit {code}\n"


def load_cases():
    with open(os.path.join(HERE, "cases.json"), encoding="utf-8") as fh:
        return json.load(fh)


def main():
    for name, args in load_cases().items():
        with open(os.path.join(HERE, name + ".txt"), "w", encoding="utf-8", newline="") as fh:
            fh.write(render(args))


if __name__ == "__main__":
    main()
