"""Shared registry for the acceptance suite's per-criterion summary lines."""

RESULTS: dict[int, list[tuple[bool, str]]] = {}


def record(criterion, ok, detail):
    RESULTS.setdefault(criterion, []).append((bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(RESULTS):
        entries = RESULTS[c]
        ok = all(o for o, _ in entries)
        failed = [d for o, d in entries if not o]
        if failed:
            detail = f"{len(failed)} of {len(entries)} checks failed: " + "; ".join(failed[:4])
        elif len(entries) > 8:
            detail = f"all {len(entries)} checks passed, e.g. {entries[0][1]}"
        else:
            detail = "; ".join(d for _, d in entries)
        terminalreporter.write_line(f"criterion {c}: {'PASS' if ok else 'FAIL'} {detail}")
