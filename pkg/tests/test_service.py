import json

import pytest
from fastapi.testclient import TestClient

from sessionscope.logstore import LOG_EXTENSION, write_session_file
from sessionscope.service import METRICS_FILENAME, NOTES_FILENAME, create_app
from sessionscope.synth import ScenarioSpec, synthesize_session


class FakeClock:
    def __init__(self) -> None:
        self.now = 100.0

    def __call__(self) -> float:
        return self.now

    def advance(self, dt: float) -> None:
        self.now += dt


@pytest.fixture(scope="module")
def log_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("logs")
    for i, scenario in enumerate(["arena", "patrol", "fps-drill", "arena"]):
        log = synthesize_session(
            ScenarioSpec(scenario=scenario, seed=50 + i, duration=5.0)
        )
        write_session_file(log, directory / f"{log.session_id}{LOG_EXTENSION}")
    return directory


@pytest.fixture()
def service(log_dir):
    clock = FakeClock()
    app = create_app(log_dir, clock=clock)
    with TestClient(app) as client:
        yield client, clock, log_dir


def session_names(client) -> list[str]:
    return [e["path"] for e in client.get("/api/sessions").json()["sessions"]]


def load(client, names) -> dict:
    resp = client.post("/api/load", json={"paths": names})
    assert resp.status_code == 200, resp.text
    return resp.json()


class TestSessions:
    def test_discovery_lists_all_logs(self, service):
        client, _, _ = service
        resp = client.get("/api/sessions")
        assert resp.status_code == 200
        body = resp.json()
        assert len(body["sessions"]) == 4
        assert body["loaded"] == []
        assert all("session_id" in e for e in body["sessions"])

    def test_broken_log_listed_with_error(self, service):
        client, _, directory = service
        bad = directory / f"zz-broken{LOG_EXTENSION}"
        bad.write_bytes(b"{nope\n")
        try:
            entries = client.get("/api/sessions").json()["sessions"]
            marked = [e for e in entries if e["path"] == bad.name]
            assert marked and "error" in marked[0]
        finally:
            bad.unlink()

    def test_loaded_paths_reported_after_load(self, service):
        client, _, _ = service
        names = session_names(client)[:2]
        load(client, names)
        assert client.get("/api/sessions").json()["loaded"] == names


class TestLoad:
    def test_load_assigns_distinct_colors(self, service):
        client, _, _ = service
        body = load(client, session_names(client)[:3])
        colors = [tuple(s["color"]) for s in body["sessions"]]
        assert len(set(colors)) == 3
        assert body["duration_max"] == 5.0

    def test_four_sessions_hit_capacity(self, service):
        client, _, _ = service
        resp = client.post("/api/load", json={"paths": session_names(client)[:4]})
        assert resp.status_code == 409

    def test_unknown_path_is_404(self, service):
        client, _, _ = service
        resp = client.post("/api/load", json={"paths": [f"ghost{LOG_EXTENSION}"]})
        assert resp.status_code == 404

    def test_unparseable_log_is_400(self, service):
        client, _, directory = service
        bad = directory / f"zz-corrupt{LOG_EXTENSION}"
        bad.write_bytes(b"{broken\n")
        try:
            resp = client.post("/api/load", json={"paths": [bad.name]})
            assert resp.status_code == 400
        finally:
            bad.unlink()

    @pytest.mark.parametrize(
        "body",
        [{}, {"paths": []}, {"paths": "x"}, {"paths": [1, 2]}],
    )
    def test_malformed_paths_are_400(self, service, body):
        client, _, _ = service
        assert client.post("/api/load", json=body).status_code == 400

    def test_invalid_json_body_is_400(self, service):
        client, _, _ = service
        resp = client.post(
            "/api/load", content=b"{oops", headers={"content-type": "application/json"}
        )
        assert resp.status_code == 400

    def test_endpoints_409_before_load(self, service):
        client, _, _ = service
        assert client.get("/api/frame").status_code == 409
        assert client.post("/api/transport", json={"cmd": "play"}).status_code == 409
        assert client.get("/api/heatmap").status_code == 409
        assert client.get("/api/coverage").status_code == 409
        assert client.get("/api/filters").status_code == 409
        assert (
            client.post(
                "/api/annotations", json={"p": [0, 0, 0], "text": "x"}
            ).status_code
            == 409
        )

    def test_reload_resets_metrics(self, service):
        client, _, _ = service
        names = session_names(client)
        load(client, names[:1])
        client.post("/api/transport", json={"cmd": "play"})
        load(client, names[:1])
        assert client.get("/api/metrics").json()["NumTimesPlayed"] == 0


class TestTransportAndFrame:
    def test_play_then_frame_advances_with_wall_clock(self, service):
        client, clock, _ = service
        load(client, session_names(client)[:1])
        resp = client.post("/api/transport", json={"cmd": "play"})
        assert resp.json()["mode"] == "Playing"
        clock.advance(1.0)
        frame = client.get("/api/frame").json()
        assert frame["t"] == 1.0
        assert frame["transport"]["mode"] == "Playing"
        assert frame["objects"]
        first = frame["objects"][0]
        assert set(first) >= {"session", "id", "name", "category", "color", "p", "q"}

    def test_fast_forward_rate_applies_to_wall_time(self, service):
        client, clock, _ = service
        load(client, session_names(client)[:1])
        client.post("/api/transport", json={"cmd": "fast_forward"})
        clock.advance(0.5)
        assert client.get("/api/frame").json()["t"] == 1.0

    def test_paused_frames_are_stable(self, service):
        client, clock, _ = service
        load(client, session_names(client)[:1])
        client.post("/api/transport", json={"cmd": "seek", "t": 2.0})
        first = client.get("/api/frame").json()
        clock.advance(10.0)
        assert client.get("/api/frame").json() == first

    def test_seek_validates_t(self, service):
        client, _, _ = service
        load(client, session_names(client)[:1])
        assert (
            client.post("/api/transport", json={"cmd": "seek"}).status_code == 400
        )
        assert (
            client.post(
                "/api/transport", json={"cmd": "seek", "t": "late"}
            ).status_code
            == 400
        )

    def test_unknown_command_is_400(self, service):
        client, _, _ = service
        load(client, session_names(client)[:1])
        assert client.post("/api/transport", json={"cmd": "warp"}).status_code == 400

    def test_pause_gap_does_not_leak_into_resume(self, service):
        client, clock, _ = service
        load(client, session_names(client)[:1])
        client.post("/api/transport", json={"cmd": "play"})
        clock.advance(1.0)
        client.post("/api/transport", json={"cmd": "pause"})
        clock.advance(60.0)
        client.post("/api/transport", json={"cmd": "resume"})
        clock.advance(0.5)
        assert client.get("/api/frame").json()["t"] == pytest.approx(1.5)

    def test_trails_endpoint_takes_explicit_t(self, service):
        client, _, _ = service
        load(client, session_names(client)[:1])
        body = client.get("/api/trails", params={"t": 2.0}).json()
        assert body["t"] == 2.0
        assert body["trails"]
        for trail in body["trails"]:
            assert all(point[0] <= 2.0 for point in trail["points"])


class TestHeatmap:
    def test_grid_payload(self, service):
        client, _, _ = service
        load(client, session_names(client)[:2])
        body = client.get("/api/heatmap").json()
        assert set(body) == {"origin", "cell_size", "cols", "rows", "counts", "max_count"}
        assert len(body["counts"]) == body["cols"] * body["rows"]
        assert sum(body["counts"]) > 0
        assert max(body["counts"]) == body["max_count"]

    def test_cell_size_parameter(self, service):
        client, _, _ = service
        load(client, session_names(client)[:1])
        coarse = client.get("/api/heatmap", params={"cell": "1.0"}).json()
        fine = client.get("/api/heatmap", params={"cell": "0.1"}).json()
        assert coarse["cols"] < fine["cols"]
        assert sum(coarse["counts"]) == sum(fine["counts"])

    def test_invalid_cell_is_400(self, service):
        client, _, _ = service
        load(client, session_names(client)[:1])
        assert client.get("/api/heatmap", params={"cell": "wide"}).status_code == 400
        assert client.get("/api/heatmap", params={"cell": "-1"}).status_code == 400

    def test_unknown_category_is_400(self, service):
        client, _, _ = service
        load(client, session_names(client)[:1])
        resp = client.get("/api/heatmap", params={"categories": "Wizard"})
        assert resp.status_code == 400

    def test_png_with_grid_headers(self, service):
        client, _, _ = service
        load(client, session_names(client)[:1])
        resp = client.get("/api/heatmap.png")
        assert resp.status_code == 200
        assert resp.headers["content-type"] == "image/png"
        assert resp.content[:8] == b"\x89PNG\r\n\x1a\n"
        cols = int(resp.headers["x-grid-cols"])
        rows = int(resp.headers["x-grid-rows"])
        assert cols > 0 and rows > 0
        float(resp.headers["x-grid-origin-x"])
        float(resp.headers["x-grid-cell-size"])

    def test_toggle_flag_counts_once_per_request(self, service):
        client, _, _ = service
        load(client, session_names(client)[:1])
        client.get("/api/heatmap")
        assert client.get("/api/metrics").json()["NumTimesHeatmapToggled"] == 0
        client.get("/api/heatmap", params={"toggle": "true"})
        client.get("/api/heatmap.png")
        assert client.get("/api/metrics").json()["NumTimesHeatmapToggled"] == 1

    def test_empty_selection_is_404(self, service):
        client, _, _ = service
        load(client, session_names(client)[:1])
        client.post("/api/filters", json={"sessions": [False]})
        assert client.get("/api/heatmap").status_code == 404


class TestFilters:
    def test_defaults_enable_all_groups(self, service):
        client, _, _ = service
        load(client, session_names(client)[:1])
        body = client.get("/api/filters").json()
        assert "Player" in body["categories"]
        assert "Trails" in body["categories"]
        assert body["objects"] == {}
        assert body["sessions"] is None

    def test_partial_update_keeps_other_fields(self, service):
        client, _, _ = service
        load(client, session_names(client)[:2])
        client.post("/api/filters", json={"objects": {"player-1": False}})
        body = client.post("/api/filters", json={"sessions": [True, False]}).json()
        assert body["objects"] == {"player-1": False}
        assert body["sessions"] == [True, False]

    def test_filter_effect_visible_in_frame(self, service):
        client, _, _ = service
        load(client, session_names(client)[:1])
        ids = {o["id"] for o in client.get("/api/frame").json()["objects"]}
        assert "player-1" in ids
        client.post("/api/filters", json={"objects": {"player-1": False}})
        ids = {o["id"] for o in client.get("/api/frame").json()["objects"]}
        assert "player-1" not in ids

    def test_unknown_group_is_400(self, service):
        client, _, _ = service
        load(client, session_names(client)[:1])
        resp = client.post("/api/filters", json={"categories": ["Ghosts"]})
        assert resp.status_code == 400

    def test_unknown_object_id_is_400(self, service):
        client, _, _ = service
        load(client, session_names(client)[:1])
        resp = client.post("/api/filters", json={"objects": {"ghost": True}})
        assert resp.status_code == 400

    def test_wrong_session_list_length_is_400(self, service):
        client, _, _ = service
        load(client, session_names(client)[:1])
        resp = client.post("/api/filters", json={"sessions": [True, False]})
        assert resp.status_code == 400


class TestAnnotations:
    def test_create_pauses_playback_and_persists(self, service):
        client, clock, directory = service
        load(client, session_names(client)[:1])
        client.post("/api/transport", json={"cmd": "play"})
        clock.advance(1.5)
        resp = client.post(
            "/api/annotations",
            json={"p": [1.0, 0.0, 2.0], "text": "spawn point", "author": "sam"},
        )
        assert resp.status_code == 201
        note = resp.json()
        assert note["p"] == [1.0, 0.0, 2.0]
        assert note["t"] == pytest.approx(1.5)
        assert note["author"] == "sam"
        assert client.get("/api/frame").json()["transport"]["mode"] == "Paused"
        notes_file = directory / NOTES_FILENAME
        assert notes_file.is_file()
        assert any(
            json.loads(line)["text"] == "spawn point"
            for line in notes_file.read_text().splitlines()
        )

    def test_get_lists_notes_in_time_order(self, service):
        client, _, _ = service
        load(client, session_names(client)[:1])
        client.post("/api/annotations", json={"p": [0, 0, 0], "text": "later", "t": 4.0})
        client.post("/api/annotations", json={"p": [0, 0, 0], "text": "sooner", "t": 1.0})
        texts = [n["text"] for n in client.get("/api/annotations").json()["annotations"]]
        assert texts.index("sooner") < texts.index("later")

    @pytest.mark.parametrize(
        "body",
        [
            {"text": "x"},
            {"p": [0, 0], "text": "x"},
            {"p": [0, 0, "z"], "text": "x"},
            {"p": [0, 0, 0]},
            {"p": [0, 0, 0], "text": ""},
            {"p": [0, 0, 0], "text": "x", "author": 7},
            {"p": [0, 0, 0], "text": "x", "t": "now"},
        ],
    )
    def test_invalid_bodies_are_400(self, service, body):
        client, _, _ = service
        load(client, session_names(client)[:1])
        assert client.post("/api/annotations", json=body).status_code == 400


class TestCoverageEndpoint:
    def test_report_shape(self, service):
        client, _, _ = service
        load(client, session_names(client)[:1])
        body = client.get("/api/coverage", params={"cell": "0.5"}).json()
        assert set(body) == {"spec", "covered_fraction", "unseen_cells", "probe_height"}
        assert 0.0 <= body["covered_fraction"] <= 1.0
        assert body["probe_height"] == 1.0

    def test_height_parameter(self, service):
        client, _, _ = service
        load(client, session_names(client)[:1])
        body = client.get(
            "/api/coverage", params={"cell": "0.5", "height": "40.0"}
        ).json()
        # Far above the scene nothing is visible.
        assert body["covered_fraction"] == 0.0
        assert body["probe_height"] == 40.0

    def test_all_sessions_filtered_out_is_404(self, service):
        client, _, _ = service
        load(client, session_names(client)[:1])
        client.post("/api/filters", json={"sessions": [False]})
        assert client.get("/api/coverage").status_code == 404


class TestMetricsEndpoint:
    def test_counts_match_accepted_commands(self, service):
        client, _, _ = service
        load(client, session_names(client)[:1])
        for cmd in ["play", "pause", "resume", "rewind", "fast_forward", "stop"]:
            assert client.post("/api/transport", json={"cmd": cmd}).status_code == 200
        client.post("/api/transport", json={"cmd": "bogus"})
        client.post("/api/annotations", json={"p": [0, 0, 0], "text": "n"})
        body = client.get("/api/metrics").json()
        assert body == {
            "NumTimesPlayed": 2,  # play + resume
            "NumTimesPlayedReverse": 1,
            "NumTimesPlayedForward": 1,
            "NumTimesPaused": 1,
            "NumTimesHeatmapToggled": 0,
            "NumTimesNoteGenerated": 1,
        }

    def test_save_endpoint_writes_file(self, service):
        client, _, directory = service
        load(client, session_names(client)[:1])
        client.post("/api/transport", json={"cmd": "play"})
        path = client.post("/api/metrics/save").json()["path"]
        data = json.loads((directory / METRICS_FILENAME).read_text())
        assert path.endswith(METRICS_FILENAME)
        assert data["NumTimesPlayed"] == 1

    def test_metrics_written_on_shutdown(self, log_dir):
        clock = FakeClock()
        app = create_app(log_dir, clock=clock)
        with TestClient(app) as client:
            load(client, session_names(client)[:1])
            client.post("/api/transport", json={"cmd": "rewind"})
        data = json.loads((log_dir / METRICS_FILENAME).read_text())
        assert data["NumTimesPlayedReverse"] == 1


class TestNotesReload:
    def test_existing_notes_loaded_at_startup(self, log_dir):
        clock = FakeClock()
        with TestClient(create_app(log_dir, clock=clock)) as client:
            load(client, session_names(client)[:1])
            client.post("/api/annotations", json={"p": [0, 0, 0], "text": "persisted"})
        with TestClient(create_app(log_dir, clock=FakeClock())) as client:
            notes = client.get("/api/annotations").json()["annotations"]
            assert any(n["text"] == "persisted" for n in notes)
