import os

ENV_VAR = "PRESTIGERANK_THREADS"


def thread_count() -> int:
    """Worker cap from ``PRESTIGERANK_THREADS`` (default 1, invalid values fall back to 1)."""
    raw = os.environ.get(ENV_VAR, "").strip()
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)
