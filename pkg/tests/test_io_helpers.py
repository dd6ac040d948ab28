import math
import numpy as np
import pytest
from core.memtrace import MemTrace
from core.scene import Frame
from utils.errors import FrameFormatError
from utils.io_helpers import read_csv, read_depth, read_ppm, safe_write_file, write_csv, write_frame


def test_frame_files(tmp_path):
    frame = Frame.empty(3, 4)
    frame.color[:] = [1.0, 0.0, 0.5]
    frame.depth[1, 2] = 2.25
    path = str(tmp_path / 'out' / 'frame.ppm')
    write_frame(frame, path)
    color = read_ppm(path)
    assert color.shape == (3, 4, 3)
    assert np.allclose(color[0, 0], [1.0, 0.0, 128 / 255.0])
    depth = read_depth(str(tmp_path / 'out' / 'frame.depth'))
    assert depth[1, 2] == 2.25
    assert math.isinf(depth[0, 0])


def test_depth_rejects_other_files(tmp_path):
    path = tmp_path / 'bad.depth'
    path.write_bytes(b'XXXX' + b'\x00' * 12)
    with pytest.raises(FrameFormatError):
        read_depth(str(path))


def test_depth_rejects_truncated_files(tmp_path):
    frame = Frame.empty(3, 4)
    path = tmp_path / 'frame.depth'
    write_frame(frame, str(tmp_path / 'frame.ppm'))
    path.write_bytes(path.read_bytes()[:-4])
    with pytest.raises(FrameFormatError) as excinfo:
        read_depth(str(path))
    assert excinfo.value.module == 'io'
    path.write_bytes(b'SFDP')
    with pytest.raises(FrameFormatError):
        read_depth(str(path))


def test_csv_is_versioned(tmp_path):
    path = str(tmp_path / 'rows.csv')
    write_csv(path, [{'frame': 0, 'psnr': math.inf}, {'frame': 1, 'psnr': 31.5}])
    rows = read_csv(path)
    assert rows[0] == {'schema_version': '1', 'frame': '0', 'psnr': 'INF'}
    assert rows[1]['psnr'] == '31.5'


def test_csv_without_version(tmp_path):
    path = str(tmp_path / 'rows.csv')
    write_csv(path, [{'a': 1}], versioned=False)
    assert read_csv(path) == [{'a': '1'}]


def test_trace_csv(tmp_path):
    trace = MemTrace()
    trace.record('dram_stream', 0, 128, tag=4)
    trace.record_many('sram_read', [0, 3], 16, tag=4)
    path = str(tmp_path / 'trace.csv')
    trace.write_csv(path)
    rows = read_csv(path)
    assert [row['seq'] for row in rows] == ['0', '1', '2']
    assert rows[2] == {'schema_version': '1', 'seq': '2', 'kind': 'sram_read',
        'address': '3', 'bytes': '16', 'tag': '4'}
    assert trace.total_bytes() == 128
    assert trace.count('sram_read') == 2


def test_safe_write_keeps_backup(tmp_path):
    path = tmp_path / 'config.ini'
    path.write_text('old')
    assert safe_write_file(str(path), 'new')
    assert path.read_text() == 'new'
    assert (tmp_path / 'config.ini.backup').read_text() == 'old'
