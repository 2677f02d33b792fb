"""Collects one pass/fail line per acceptance criterion for the terminal summary."""

LINES: dict[int, str] = {}


def record(number: int, ok: bool, detail: str, seconds: float) -> None:
    status = "PASS" if ok else "FAIL"
    line = f"criterion {number:2d}: {status}  ({seconds:.2f} s)  {detail}"
    LINES[number] = line
    print(line)
