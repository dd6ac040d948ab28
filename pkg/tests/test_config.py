import json
import math
import pytest
from config_manager import ConfigManager, ExperimentConfig, config_from_command
from core.scene import save_scene
from utils.errors import ConfigError


def test_defaults_are_valid():
    config = ExperimentConfig()
    config.validate()
    assert config.runtime_config().angle_threshold == pytest.approx(math.
        radians(4.0))
    assert config.intrinsics().width == 32


def test_save_and_reload(tmp_path, small_config):
    manager = ConfigManager()
    manager.config = small_config
    small_config.hardware = {'banks': '16'}
    path = str(tmp_path / 'run.ini')
    manager.save(path)
    loaded = ConfigManager(path).validated()
    assert loaded.to_dict() == small_config.to_dict()
    assert loaded.hw_config().banks == 16


def test_json_config(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'scene': {'kind': 'unstructured', 'seed':
        '4'}, 'runtime': {'window': 8}}))
    config = ConfigManager(str(path)).validated()
    assert config.scene.kind == 'unstructured'
    assert config.scene.seed == 4
    assert config.runtime.window == 8


def test_overrides_win(tmp_path):
    path = tmp_path / 'run.ini'
    path.write_text('[runtime]\nwindow = 3\n')
    config = config_from_command({'config': str(path), 'window': 5, 'phi':
        '2.5', 'kind': None})
    assert config.runtime.window == 5
    assert config.runtime.angle_threshold_deg == 2.5
    assert config.scene.kind == 'structured'


@pytest.mark.parametrize('text', ['[scene]\nkind = voxels\n',
    '[runtime]\nwindow = 0\n', '[render]\nsamples = 1\n',
    '[pipeline]\nmode = magic\n', '[hardware]\nbanks = 0\n',
    '[runtime]\nmode = cloud\n'])
def test_invalid_values(tmp_path, text):
    path = tmp_path / 'bad.ini'
    path.write_text(text)
    with pytest.raises(ConfigError):
        ConfigManager(str(path)).validated()


def test_unknown_key_and_section(tmp_path):
    path = tmp_path / 'bad.ini'
    path.write_text('[scene]\ncolour = red\n')
    with pytest.raises(ConfigError):
        ConfigManager(str(path))
    path.write_text('[lighting]\nsun = 1\n')
    with pytest.raises(ConfigError):
        ConfigManager(str(path))


def test_bad_number(tmp_path):
    path = tmp_path / 'bad.ini'
    path.write_text('[runtime]\nwindow = many\n')
    with pytest.raises(ConfigError):
        ConfigManager(str(path))


def test_missing_file():
    with pytest.raises(ConfigError):
        ConfigManager('/nonexistent/run.ini')


def test_missing_scene_path(small_config):
    small_config.scene.path = '/nonexistent/world.scene'
    with pytest.raises(ConfigError):
        small_config.validate()


def test_scene_from_file(tmp_path, small_config, unstructured_scene):
    path = str(tmp_path / 'world.scene')
    save_scene(unstructured_scene, path)
    small_config.scene.path = path
    small_config.validate()
    assert small_config.build_scene().kind == 'unstructured'
