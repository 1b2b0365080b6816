"""Near-real-time mode: UDP angle frames + replayed EMG, incremental scan.

Frames arrive as one-line datagrams and are merged with the EMG stream by
zero-order hold exactly as in file mode: a row is final once a frame with a
later timestamp has been seen (or the stream closes). The distance profile
grows window by window with the same DTW kernel the offline scan uses, and
provisional segments are surfaced as soon as their closing minimum lies a
full window behind the frontier, so detection latency is bounded by the
window width. At close() the accumulated recording goes through the
ordinary file-mode pipeline, which makes the final dataset identical to
running offline on the same data (the in-flight output is advisory).
"""

from __future__ import annotations

import queue
import socket
import threading
from dataclasses import dataclass

import numpy as np

from .config import PipelineConfig, load_template
from .errors import EmgLabelError, PacketFormatError, UnmergeableError
from .ingest import SAMPLE_RATE_HZ, MergedRecording, decode_angle_packet
from .kinematics import AngleFrame
from .matching import Template, _scan_kernel, detect_local_minima, extract_segments
from .pipeline import run_pipeline
from .signals import TimeSeries


class AngleListener:
    """Background UDP receiver; decoded frames land in a queue."""

    def __init__(self, port: int, host: str = "127.0.0.1"):
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.sock.bind((host, port))
        self.sock.settimeout(0.05)
        self.frames: queue.Queue[AngleFrame] = queue.Queue()
        self.dropped = 0
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, daemon=True)

    def start(self) -> "AngleListener":
        self._thread.start()
        return self

    def _run(self) -> None:
        while not self._stop.is_set():
            try:
                payload, _ = self.sock.recvfrom(4096)
            except socket.timeout:
                continue
            except OSError:
                break
            try:
                self.frames.put(decode_angle_packet(payload))
            except PacketFormatError:
                self.dropped += 1

    def stop(self) -> None:
        self._stop.set()
        self._thread.join(timeout=2.0)
        self.sock.close()


def send_frames(frames, port: int, host: str = "127.0.0.1") -> None:
    """Fire AngleFrames (or raw payload bytes) at a listener. Test/replay aid."""
    from .ingest import encode_angle_packet

    sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    try:
        for f in frames:
            payload = f if isinstance(f, bytes) else encode_angle_packet(f)
            sock.sendto(payload, (host, port))
    finally:
        sock.close()


@dataclass
class ProvisionalSegment:
    action_name: str
    start_index: int
    end_index: int
    dtw_distance: float
    closed_at: int  # profile frontier when the segment was confirmed


class LiveSession:
    """Incrementally merge streams and scan for repetitions as data arrives."""

    def __init__(self, cfg: PipelineConfig, emg_t0: float = 0.0):
        self.cfg = cfg
        self.templates: list[Template] = [
            load_template(a, cfg.mdtw.max_distance) for a in cfg.actions
        ]
        self.emg_t0 = emg_t0
        self._emg_rows: list[np.ndarray] = []  # all pushed EMG rows, in order
        self._frames: list[AngleFrame] = []
        self._out_of_order = 0
        self._merged_upto = 0  # EMG rows already merged
        self._merged_angles: list[np.ndarray] = []
        self._dropped_prefix = 0
        self._profiles: dict[str, list[float]] = {t.action_name: [] for t in self.templates}
        self._emitted: dict[str, set[tuple[int, int]]] = {
            t.action_name: set() for t in self.templates
        }
        self.provisional: list[ProvisionalSegment] = []

    # -- feeding ---------------------------------------------------------

    def push_frame(self, frame: AngleFrame) -> None:
        t = frame.t + self.cfg.io.clock_offset_s
        if self._frames and t < self._frames[-1].t:
            self._out_of_order += 1
            return
        self._frames.append(
            AngleFrame(t, frame.shoulder_deg, frame.elbow_deg, frame.wrist_deg,
                       frame.clamped)
        )
        self._advance()

    def push_emg(self, rows: np.ndarray) -> None:
        rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
        for row in rows:
            self._emg_rows.append(row)
        self._advance()

    # -- incremental merge + scan ----------------------------------------

    def _row_time(self, i: int) -> float:
        return self.emg_t0 + i / SAMPLE_RATE_HZ

    def _advance(self, closing: bool = False) -> None:
        if not self._frames:
            return
        frame_ts = [f.t for f in self._frames]
        horizon = np.inf if closing else self._frames[-1].t
        i = self._merged_upto
        while i < len(self._emg_rows):
            t = self._row_time(i)
            if t < frame_ts[0]:
                self._dropped_prefix += 1
                i += 1
                continue
            if not closing and t >= horizon:
                break
            k = int(np.searchsorted(frame_ts, t, side="right")) - 1
            f = self._frames[k]
            self._merged_angles.append(
                np.array([f.shoulder_deg, f.elbow_deg, f.wrist_deg])
            )
            i += 1
        self._merged_upto = i
        self._extend_profiles()

    def merged_len(self) -> int:
        return len(self._merged_angles)

    def _elbow(self) -> np.ndarray:
        if not self._merged_angles:
            return np.empty(0)
        return np.array([a[1] for a in self._merged_angles])

    def _extend_profiles(self) -> None:
        n = self.merged_len()
        if n == 0:
            return
        elbow = self._elbow()
        for tpl in self.templates:
            w = self.cfg.mdtw.window_factor * len(tpl.series)
            prof = self._profiles[tpl.action_name]
            hi = n - w + 1
            if hi <= len(prof):
                continue
            lo = len(prof)
            chunk = _scan_kernel(
                np.ascontiguousarray(tpl.series.samples),
                np.ascontiguousarray(elbow[lo : hi + w - 1]),
                w,
                self.cfg.mdtw.squared_cost,
            )
            prof.extend(chunk.tolist())

    def poll_segments(self) -> list[ProvisionalSegment]:
        """Provisional segments whose closing boundary is >= W behind the frontier.

        Computed on the raw merged elbow trace; the authoritative result
        comes from close().
        """
        from .matching import DistanceProfile

        fresh: list[ProvisionalSegment] = []
        elbow = self._elbow()
        for tpl in self.templates:
            prof_list = self._profiles[tpl.action_name]
            if len(prof_list) < 3:
                continue
            w = self.cfg.mdtw.window_factor * len(tpl.series)
            profile = DistanceProfile(
                distances=np.array(prof_list),
                positions=np.arange(len(prof_list), dtype=np.int64),
                window_len=w,
                template_len=len(tpl.series),
            )
            try:
                minima = detect_local_minima(
                    profile, self.cfg.mdtw.threshold, self.cfg.mdtw.max_depth
                )
                if len(minima) < 2:
                    continue
                res = extract_segments(
                    profile, minima, tpl, TimeSeries(elbow, SAMPLE_RATE_HZ),
                    squared_cost=self.cfg.mdtw.squared_cost,
                )
            except EmgLabelError:
                continue  # partial profile: not enough structure yet
            frontier = len(prof_list)
            for seg in res.segments:
                key = (seg.start_index, seg.end_index)
                # closing minimum's window fully behind the frontier
                if seg.end_index + w <= frontier and key not in self._emitted[tpl.action_name]:
                    self._emitted[tpl.action_name].add(key)
                    p = ProvisionalSegment(
                        tpl.action_name, seg.start_index, seg.end_index,
                        seg.dtw_distance, closed_at=frontier,
                    )
                    fresh.append(p)
                    self.provisional.append(p)
        return fresh

    # -- finalization ------------------------------------------------------

    def recording(self) -> MergedRecording:
        self._advance(closing=True)
        if not self._merged_angles:
            raise UnmergeableError("no rows merged: no angle frames received")
        n = self.merged_len()
        first = self._dropped_prefix
        emg = np.array(self._emg_rows[first : first + n])
        t = self.emg_t0 + (np.arange(first, first + n) / SAMPLE_RATE_HZ)
        return MergedRecording(
            t=t,
            emg=emg.reshape(n, 5),
            angles=np.array(self._merged_angles).reshape(n, 3),
            dropped_prefix=first,
        )

    def close(self):
        """Final authoritative result: the file-mode pipeline on all data.

        Returns (recording, dataset, report).
        """
        rec = self.recording()
        dataset, report = run_pipeline(self.cfg, rec)
        report["live"] = {
            "provisional_segments": len(self.provisional),
            "out_of_order_frames": self._out_of_order,
            "dropped_prefix": self._dropped_prefix,
        }
        return rec, dataset, report
