import pytest
from hypothesis import settings

from qoembac.traffic import FrameRecord, VideoTrace, synth_trace

settings.register_profile("default", deadline=None)
settings.load_profile("default")


def cbr_trace(frame_bytes: int, n_frames: int = 30, fps: float = 30.0, gop: int = 30) -> VideoTrace:
    frames = [FrameRecord(i, "I" if i % gop == 0 else "P", frame_bytes) for i in range(n_frames)]
    return VideoTrace(tuple(frames), fps=fps, gop=gop)


@pytest.fixture
def cbr():
    return cbr_trace


@pytest.fixture(scope="session")
def small_vbr():
    return synth_trace(1e6, 3.0, 10.0, seed=5)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[key])
