import io
import threading

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image as PILImage

from epf.corpus import synthetic_images
from epf.filters import registry
from epf.service import ServiceConfig, create_app


def _png_payload(img=None, size=32):
    if img is None:
        img = synthetic_images(size)["blobs_noise"]
    arr = np.round(img.data * 255).astype(np.uint8)
    pil = PILImage.fromarray(arr[:, :, 0], mode="L") if img.channels == 1 else PILImage.fromarray(arr)
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    return buf.getvalue()


@pytest.fixture(scope="module")
def client():
    app = create_app(registry(), ServiceConfig(max_sessions=4, evict_lru=True))
    with TestClient(app) as c:
        yield c


def _new_session(client) -> str:
    r = client.post("/api/session", files={"image": ("x.png", _png_payload(), "image/png")})
    assert r.status_code == 200
    return r.json()["session_id"]


def test_filters_endpoint(client):
    r = client.get("/api/filters")
    assert r.status_code == 200
    by_id = {d["id"]: d for d in r.json()}
    assert by_id["l0"]["param_max"] == 0.3


def test_session_upload_reports_dimensions(client):
    r = client.post("/api/session", files={"image": ("x.png", _png_payload(), "image/png")})
    body = r.json()
    assert r.status_code == 200
    assert body["width"] == 32 and body["height"] == 32
    assert body["scale"] == 1.0


def test_session_rejects_text_body(client):
    r = client.post("/api/session", files={"image": ("x.txt", b"not an image", "text/plain")})
    assert r.status_code == 400


def test_session_rejects_oversize():
    app = create_app(registry(), ServiceConfig(max_upload_bytes=100))
    with TestClient(app) as c:
        r = c.post("/api/session", files={"image": ("x.png", _png_payload(), "image/png")})
        assert r.status_code == 413


def test_session_table_full_without_eviction():
    app = create_app(registry(), ServiceConfig(max_sessions=2, evict_lru=False))
    with TestClient(app) as c:
        for _ in range(2):
            assert c.post(
                "/api/session", files={"image": ("x.png", _png_payload(), "image/png")}
            ).status_code == 200
        r = c.post("/api/session", files={"image": ("x.png", _png_payload(), "image/png")})
        assert r.status_code == 503


def test_session_lru_eviction_keeps_table_bounded():
    app = create_app(registry(), ServiceConfig(max_sessions=2, evict_lru=True))
    with TestClient(app) as c:
        sids = [
            c.post("/api/session", files={"image": ("x.png", _png_payload(), "image/png")}).json()["session_id"]
            for _ in range(3)
        ]
        # oldest session evicted
        r = c.post("/api/match", json={"session_id": sids[0], "filter_id": "gauss", "level": 0.1})
        assert r.status_code == 404
        r = c.post("/api/match", json={"session_id": sids[2], "filter_id": "gauss", "level": 0.1})
        assert r.status_code == 200


def test_match_level_zero_returns_input(client):
    sid = _new_session(client)
    r = client.post("/api/match", json={"session_id": sid, "filter_id": "gauss", "level": 0.0})
    body = r.json()
    assert r.status_code == 200
    assert body["match"]["param"] == 0.0
    assert body["match"]["converged"] is True
    out = client.get(body["image_url"])
    original = client.get(f"/api/image/{sid}/input")
    assert out.content == original.content


def test_match_cache_contract(client):
    sid = _new_session(client)
    first = client.post("/api/match", json={"session_id": sid, "filter_id": "dom", "level": 0.5})
    second = client.post("/api/match", json={"session_id": sid, "filter_id": "dom", "level": 0.5})
    b1, b2 = first.json(), second.json()
    assert b1["cached"] is False
    assert b2["cached"] is True
    b1.pop("cached")
    b2.pop("cached")
    assert b1 == b2


def test_match_convergence_on_synthetic(client):
    sid = _new_session(client)
    r = client.post("/api/match", json={"session_id": sid, "filter_id": "gauss", "level": 0.5})
    assert r.json()["match"]["deviation"] <= 1e-3


def test_match_unknown_session(client):
    r = client.post("/api/match", json={"session_id": "nope", "filter_id": "gauss", "level": 0.5})
    assert r.status_code == 404


def test_match_unknown_filter(client):
    sid = _new_session(client)
    r = client.post("/api/match", json={"session_id": sid, "filter_id": "nope", "level": 0.5})
    assert r.status_code == 404


def test_match_level_out_of_range(client):
    sid = _new_session(client)
    r = client.post("/api/match", json={"session_id": sid, "filter_id": "gauss", "level": 1.5})
    assert r.status_code == 422


def test_image_unknown_key_404(client):
    sid = _new_session(client)
    assert client.get(f"/api/image/{sid}/unknown").status_code == 404


def test_report_endpoint_schema(client):
    sid = _new_session(client)
    client.post("/api/match", json={"session_id": sid, "filter_id": "gauss", "level": 0.3})
    r = client.get(f"/api/report/{sid}/gauss/0.3")
    assert r.status_code == 200
    assert set(r.json()) == {"so", "so_smooth", "so_edge", "delta_l", "delta_c", "contrast_ratio"}


def test_report_unknown_match_404(client):
    sid = _new_session(client)
    assert client.get(f"/api/report/{sid}/gauss/0.77").status_code == 404


def test_concurrent_identical_requests_cache_one_result():
    app = create_app(registry(), ServiceConfig(workers=4, queue_cap=8))
    with TestClient(app) as client:
        sid = _new_session(client)
        results = []

        def hit():
            r = client.post("/api/match", json={"session_id": sid, "filter_id": "wls", "level": 0.4})
            results.append(r.json())

        threads = [threading.Thread(target=hit) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        matches = [r["match"] for r in results]
        assert all(m == matches[0] for m in matches)
        follow_up = client.post("/api/match", json={"session_id": sid, "filter_id": "wls", "level": 0.4})
        assert follow_up.json()["cached"] is True


def test_queue_overflow_returns_429():
    app = create_app(registry(), ServiceConfig(workers=1, queue_cap=0))
    with TestClient(app) as client:
        sid = _new_session(client)
        statuses = []

        def hit(level):
            r = client.post("/api/match", json={"session_id": sid, "filter_id": "blf", "level": level})
            statuses.append(r.status_code)

        threads = [threading.Thread(target=hit, args=(0.1 * (k + 1),)) for k in range(6)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert statuses.count(429) >= 1
        assert statuses.count(200) >= 1


def test_isolation_between_sessions(client):
    sid_a = _new_session(client)
    sid_b = _new_session(client)
    ra = client.post("/api/match", json={"session_id": sid_a, "filter_id": "gauss", "level": 0.2})
    rb = client.post("/api/match", json={"session_id": sid_b, "filter_id": "gauss", "level": 0.2})
    assert ra.json()["match"] == rb.json()["match"]  # same image, independent sessions
    assert client.get(f"/api/report/{sid_a}/gauss/0.2").status_code == 200
    assert client.get(f"/api/report/{sid_b}/gauss/0.2").status_code == 200


def test_per_session_cache_entry_eviction():
    app = create_app(registry(), ServiceConfig(max_cache_entries=2))
    with TestClient(app) as c:
        sid = _new_session(c)
        for level in (0.1, 0.2, 0.3):
            r = c.post("/api/match", json={"session_id": sid, "filter_id": "gauss", "level": level})
            assert r.status_code == 200
        # oldest entry evicted: its report and image are gone, newest kept
        assert c.get(f"/api/report/{sid}/gauss/0.1").status_code == 404
        assert c.get(f"/api/image/{sid}/gauss%400.100").status_code == 404
        assert c.get(f"/api/report/{sid}/gauss/0.3").status_code == 200
