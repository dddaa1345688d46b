import pytest

from sessionscope.synth import ScenarioSpec, synthesize_session

_CACHE: dict = {}


@pytest.fixture(scope="session")
def synth():
    """Memoized synthetic-session factory; synthesis is deterministic so
    sharing one instance across tests is safe (SessionLog is frozen)."""

    def make(
        scenario: str = "arena",
        seed: int = 1,
        players: int = 1,
        duration: float = 5.0,
        hz: float = 30.0,
        extent: tuple | None = None,
    ):
        key = (scenario, seed, players, duration, hz, extent)
        if key not in _CACHE:
            kwargs = {}
            if extent is not None:
                kwargs["extent"] = extent
            _CACHE[key] = synthesize_session(
                ScenarioSpec(
                    scenario=scenario,
                    seed=seed,
                    player_count=players,
                    duration=duration,
                    sample_hz=hz,
                    **kwargs,
                )
            )
        return _CACHE[key]

    return make
