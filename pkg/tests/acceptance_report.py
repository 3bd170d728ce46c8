"""Shared store for the acceptance summary lines (filled by test_acceptance)."""
LINES: dict = {}


def report(n: int, ok: bool, seconds: float, detail: str) -> str:
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  ({seconds:.2f} s)  {detail}"
    LINES[n] = line
    print(line)
    return line
