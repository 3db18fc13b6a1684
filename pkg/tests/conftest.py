import pytest

from curvequery.service import create_app


@pytest.fixture
def make_client(tmp_path):
    """Factory for TestClients; each call gets its own data directory
    unless one is passed in (used to test persistence across restarts)."""
    from fastapi.testclient import TestClient

    created = []

    def factory(data_dir=None, **kwargs):
        directory = data_dir or tmp_path / f"app-{len(created)}"
        client = TestClient(create_app(directory, **kwargs))
        created.append(client)
        return client

    yield factory
    for client in created:
        client.close()


@pytest.fixture
def client(make_client):
    return make_client()
