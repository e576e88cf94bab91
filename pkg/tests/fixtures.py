import os

import pytest
import requests

from aerocell import ChannelParams, GroundUser, Region, ScenarioConfig


DATA_DIR = os.path.join(os.path.dirname(__file__), 'data')


def data_path(name):
    return os.path.join(DATA_DIR, name)


@pytest.fixture
def session_get_mock(mocker):
    return mocker.patch('requests.Session.get')


class ResponseMock(object):

    def __call__(self, status_code, content):
        mock = requests.models.Response()
        mock.status_code = status_code
        mock._content = content
        mock.encoding = 'utf-8'
        return mock


@pytest.fixture
def region():
    return Region(300.0, 400.0, 50.0)


@pytest.fixture
def channel():
    return ChannelParams.calibrated(50.0)


@pytest.fixture
def config():
    return ScenarioConfig(season_length=4, time_budget=100.0)


def cluster_users(centers, per_cluster, bw=1.0):
    users = []
    for cx, cy in centers:
        for _ in range(per_cluster):
            users.append(GroundUser(len(users), float(cx), float(cy), bw))
    return users


@pytest.fixture
def clustered_users():
    return cluster_users([(50.0, 50.0), (150.0, 200.0), (250.0, 350.0)], 4)


@pytest.fixture
def golden_paths():
    return {
        'config': data_path('golden_config.json'),
        'users': data_path('golden_users.csv'),
        'trace': data_path('golden_trace.csv'),
        'summary': data_path('golden_summary.json'),
    }
