"""Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""
LINES = {}


def record(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {detail}"
    LINES[number] = line
    print(line)
    return ok
