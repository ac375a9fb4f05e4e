"""
Tests for embedding backends.
"""

import json
import math

import numpy as np
import pytest
from aiohttp import web
from aiohttp import test_utils

from strtrend.backends import HashBackend, HttpBackend, NumericBackend, create_backend, map_backend_name
from strtrend.backends.hash import hash_vector
from strtrend.backends.numeric import extract_numbers, numeric_vector
from strtrend.types import (
    EMBEDDING_DIM,
    BackendKind,
    BackendSettings,
    ConfigurationError,
    EmbeddingError,
    EmbeddingShapeError,
)


FIXED = [round(0.001 * i, 3) for i in range(EMBEDDING_DIM)]


def _app(handler) -> web.Application:
    app = web.Application()
    app.router.add_post("/embed", handler)
    return app


@pytest.fixture
def calls():
    """Request counter shared with the mock service."""
    return {"n": 0, "bodies": []}


def test_hash_vector_is_deterministic_unit_norm():
    """Same text, same vector; every vector has unit length."""
    a = hash_vector("Total number of AirBnBs: 3")
    b = hash_vector("Total number of AirBnBs: 3")
    assert a.shape == (EMBEDDING_DIM,)
    assert a.dtype == np.float32
    np.testing.assert_array_equal(a, b)
    assert math.isclose(float(np.linalg.norm(a.astype(np.float64))), 1.0, rel_tol=1e-5)


def test_hash_vector_differs_by_one_character():
    assert not np.array_equal(hash_vector("roads: 102"), hash_vector("roads: 103"))


def test_hash_vector_of_empty_text():
    vector = hash_vector("")
    assert np.all(np.isfinite(vector))


def test_extract_numbers():
    """Dates split into year and month; region codes are skipped."""
    np.testing.assert_array_equal(
        extract_numbers("[2017-03 | D001] Total: 15032.77, change -4"),
        [2017.0, 3.0, 15032.77, -4.0],
    )


def test_numeric_vector_leading_dims():
    """Printed numbers land in the leading dims as sign*log1p(|x|)."""
    vector = numeric_vector("roads: 102")
    assert math.isclose(float(vector[0]), math.log(103), rel_tol=1e-6)
    np.testing.assert_array_equal(vector[1:], hash_vector("roads: 102")[1:])


def test_numeric_vector_without_numbers_is_hash():
    np.testing.assert_array_equal(numeric_vector("no digits here"), hash_vector("no digits here"))


def test_numeric_vector_tracks_number_order():
    first = numeric_vector("a: 1, b: 9")
    second = numeric_vector("a: 9, b: 1")
    assert first[0] == second[1]
    assert first[1] == second[0]


@pytest.mark.asyncio
async def test_local_backends_embed():
    """Hash and numeric backends return validated float32 vectors."""
    for backend in (HashBackend(), NumericBackend()):
        vector = await backend.embed("Bus ridership Boarding: 120345, Alighting: 118200")
        assert vector.shape == (EMBEDDING_DIM,)
        assert vector.dtype == np.float32
    assert HashBackend().model_id == "hash-v1"
    assert NumericBackend().model_id == "numeric-v1"


@pytest.mark.asyncio
async def test_embed_many_preserves_order():
    backend = NumericBackend()
    texts = [f"value: {i}" for i in range(10)]
    vectors = await backend.embed_many(texts, limit=3)
    for i, vector in enumerate(vectors):
        assert math.isclose(float(vector[0]), math.log1p(i), rel_tol=1e-6)


def test_validate_vector():
    """Wrong length and non-finite values are rejected."""
    backend = HashBackend()
    with pytest.raises(EmbeddingShapeError):
        backend.validate_vector(np.zeros(10))
    bad = np.zeros(EMBEDDING_DIM)
    bad[5] = np.inf
    with pytest.raises(EmbeddingError):
        backend.validate_vector(bad)


@pytest.mark.asyncio
async def test_http_backend_passthrough(calls):
    """The service's vector is returned unchanged and the request carries model and input."""
    async def handler(request):
        calls["n"] += 1
        calls["bodies"].append(await request.json())
        return web.json_response({"embedding": FIXED})

    async with test_utils.TestServer(_app(handler)) as server:
        backend = HttpBackend(str(server.make_url("")), "test-model", retry_delay=0.0)
        try:
            vector = await backend.embed("hello")
        finally:
            await backend.aclose()
    np.testing.assert_allclose(vector, np.asarray(FIXED, dtype=np.float32))
    assert calls["bodies"] == [{"model": "test-model", "input": "hello"}]


@pytest.mark.asyncio
async def test_http_backend_sends_bearer_token():
    seen = {}

    async def handler(request):
        seen["auth"] = request.headers.get("Authorization")
        return web.json_response({"embedding": FIXED})

    async with test_utils.TestServer(_app(handler)) as server:
        backend = HttpBackend(str(server.make_url("")), "m", token="secret", retry_delay=0.0)
        try:
            await backend.embed("x")
        finally:
            await backend.aclose()
    assert seen["auth"] == "Bearer secret"


@pytest.mark.asyncio
async def test_http_backend_wrong_length():
    async def handler(request):
        return web.json_response({"embedding": [0.5] * 10})

    async with test_utils.TestServer(_app(handler)) as server:
        backend = HttpBackend(str(server.make_url("")), "m", retry_delay=0.0)
        try:
            with pytest.raises(EmbeddingShapeError):
                await backend.embed("x")
        finally:
            await backend.aclose()


@pytest.mark.asyncio
async def test_http_backend_non_finite():
    """NaN in the reply is an EmbeddingError."""
    values = [0.0] * EMBEDDING_DIM
    values[3] = float("nan")
    body = json.dumps({"embedding": values})

    async def handler(request):
        return web.Response(text=body, content_type="application/json")

    async with test_utils.TestServer(_app(handler)) as server:
        backend = HttpBackend(str(server.make_url("")), "m", retry_delay=0.0)
        try:
            with pytest.raises(EmbeddingError):
                await backend.embed("x")
        finally:
            await backend.aclose()


@pytest.mark.asyncio
async def test_http_backend_missing_field():
    async def handler(request):
        return web.json_response({"vector": FIXED})

    async with test_utils.TestServer(_app(handler)) as server:
        backend = HttpBackend(str(server.make_url("")), "m", retry_delay=0.0)
        try:
            with pytest.raises(EmbeddingError, match="embedding"):
                await backend.embed("x")
        finally:
            await backend.aclose()


@pytest.mark.asyncio
async def test_http_backend_retries_then_fails(calls):
    """Server errors are retried `retries` times before giving up."""
    async def handler(request):
        calls["n"] += 1
        return web.Response(status=500, text="boom")

    async with test_utils.TestServer(_app(handler)) as server:
        backend = HttpBackend(str(server.make_url("")), "m", retries=3, retry_delay=0.0)
        try:
            with pytest.raises(EmbeddingError, match="after 3 attempts"):
                await backend.embed("x")
        finally:
            await backend.aclose()
    assert calls["n"] == 3


@pytest.mark.asyncio
async def test_http_backend_recovers_after_error(calls):
    async def handler(request):
        calls["n"] += 1
        if calls["n"] == 1:
            return web.Response(status=503)
        return web.json_response({"embedding": FIXED})

    async with test_utils.TestServer(_app(handler)) as server:
        backend = HttpBackend(str(server.make_url("")), "m", retries=3, retry_delay=0.0)
        try:
            vector = await backend.embed("x")
        finally:
            await backend.aclose()
    assert calls["n"] == 2
    assert vector.shape == (EMBEDDING_DIM,)


def test_map_backend_name():
    """Test mapping backend names to kinds."""
    assert map_backend_name("hash") == BackendKind.HASH
    assert map_backend_name("NUMERIC") == BackendKind.NUMERIC
    assert map_backend_name(" http ") == BackendKind.HTTP
    assert map_backend_name(BackendKind.HASH) == BackendKind.HASH
    with pytest.raises(ConfigurationError):
        map_backend_name("word2vec")


def test_create_backend():
    assert isinstance(create_backend(BackendSettings(kind=BackendKind.HASH)), HashBackend)
    assert isinstance(create_backend(BackendSettings(kind=BackendKind.NUMERIC)), NumericBackend)
    with pytest.raises(ConfigurationError):
        create_backend(BackendSettings(kind=BackendKind.HTTP, endpoint=""))
    backend = create_backend(BackendSettings(kind=BackendKind.HTTP, endpoint="http://localhost:9/", model_id="m"))
    assert isinstance(backend, HttpBackend)
    assert backend.url == "http://localhost:9/embed"
