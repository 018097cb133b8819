#!/usr/bin/env python3
"""Generates data/aria2_like.scenario.

Desk-scale reference model of an always-on contextual-AI glasses platform.
Sensor resolutions and rates follow the public Aria sensor configuration;
every power, energy-per-byte, work and signal-size value is synthetic and
was tuned so the placement sweep shows the expected compute/communication
trade-offs (hand tracking on-device saves power, ASR on-device costs power,
VIO alone is roughly neutral, VIO+HT saves more than HT alone) and power
delivery is about a fifth of the total.
"""

import json
import sys

P = dict(
  radio_maint=30.0, radio_epb=88.0,
)
def dec(dd, dl, an, rf=0.0): return {"digital_dynamic": dd, "digital_leakage": dl, "analog": an, "rf": rf}
CAM = dec(0.3, 0.2, 0.5); SCALAR = dec(0.2, 0.1, 0.7); COMP = dec(0.7, 0.3, 0.0)
def sensor(id, p, idle, d=CAM):
    return {"id": id, "category": "Sensor", "states": [{"name": "idle", "power_mw": idle}, {"name": "streaming", "power_mw": p}],
            "background_state": "streaming", "rail": "buck_io", "power_decomposition": d}
def compute(id, idle, active, rate=1e9):
    return {"id": id, "category": "Compute", "states": [{"name": "idle", "power_mw": idle}, {"name": "active", "power_mw": active}],
            "service_rate": rate, "rail": "buck_soc", "power_decomposition": COMP}
def fixed(id, cat, p, rail, d, **kw):
    x = {"id": id, "category": cat, "states": [{"name": "idle", "power_mw": p}], "rail": rail, "power_decomposition": d}
    x.update(kw); return x
devices = [
  sensor("rgb_camera", 38.0, 0.5),
  sensor("slam_cameras", 40.0, 0.5),
  sensor("et_cameras", 16.0, 0.3),
  sensor("imu", 3.0, 0.1, SCALAR),
  sensor("microphones", 9.0, 0.2, dec(0.25, 0.15, 0.6)),
  sensor("gnss", 12.0, 0.2, dec(0.1, 0.1, 0.3, 0.5)),
  sensor("magnetometer", 0.6, 0.05, SCALAR),
  sensor("barometer", 0.3, 0.02, SCALAR),
  compute("cpu_cluster", 8.0, 90.0),
  compute("npu", 6.0, 140.0),
  compute("cv_accel", 3.0, 60.0),
  compute("audio_dsp", 2.0, 30.0),
  fixed("isp_encoder", "Compute", 30.0, "buck_soc", COMP),
  fixed("lpddr", "Memory", 30.0, "buck_soc", dec(0.4, 0.2, 0.4), energy_per_byte_nj=0.3, capacity_bytes=64e6),
  fixed("sram", "Memory", 4.0, "buck_soc", dec(0.3, 0.7, 0.0), energy_per_byte_nj=0.05, capacity_bytes=4e6),
  fixed("flash", "Storage", 3.0, "buck_io", dec(0.4, 0.3, 0.3)),
  {"id": "noc", "category": "Interconnect", "states": [{"name": "idle", "power_mw": 6.0}, {"name": "active", "power_mw": 25.0}],
   "service_rate": 8e9, "energy_per_byte_nj": 0.02, "rail": "buck_soc", "power_decomposition": COMP},
  fixed("mipi_csi", "Interconnect", 12.0, "buck_io", dec(0.3, 0.1, 0.6)),
  {"id": "wifi_bt_radio", "category": "Radio", "states": [{"name": "idle", "power_mw": 0.0}], "rail": "buck_rf",
   "power_decomposition": dec(0.15, 0.05, 0.2, 0.6)},
  fixed("speaker_amp", "Output", 6.0, "buck_io", dec(0.1, 0.0, 0.9)),
  fixed("et_illuminators", "Output", 12.0, "buck_io", dec(0.0, 0.0, 1.0)),
  fixed("status_led", "Output", 0.8, "buck_io", dec(0.0, 0.0, 1.0)),
  fixed("soc_always_on", "SocTopLevel", 45.0, "buck_soc", dec(0.5, 0.3, 0.2)),
  fixed("clocks_plls", "SocTopLevel", 15.0, "buck_soc", dec(0.3, 0.0, 0.7)),
]
rails = [
  {"id": "pmic_main", "efficiency": 0.9, "parent": "battery"},
  {"id": "buck_soc", "efficiency": 0.88, "parent": "pmic_main"},
  {"id": "buck_io", "efficiency": 0.88, "parent": "pmic_main"},
  {"id": "buck_rf", "efficiency": 0.88, "parent": "pmic_main"},
]
def st(id, dev, w, h, c, b, r): return {"id": id, "device": dev, "width": w, "height": h, "channels": c, "bit_depth": b, "rate_hz": r}
sensors = [
  st("rgb", "rgb_camera", 1440, 1440, 1, 8, 5),
  st("greyscale", "slam_cameras", 640, 480, 2, 8, 30),
  st("et", "et_cameras", 320, 240, 1, 8, 30),
  st("imu", "imu", 1, 1, 6, 16, 800),
  st("mic", "microphones", 1, 1, 1, 16, 48000),
  st("gnss", "gnss", 1, 1, 3, 32, 1),
  st("magnetometer", "magnetometer", 1, 1, 3, 16, 100),
  st("barometer", "barometer", 1, 1, 1, 24, 50),
]
def task(id, dev, work, deps=(), mem=None, out=0, foot=0):
    t = {"id": id, "device": dev, "work": work, "deps": list(deps)}
    if mem: t["memory"] = mem
    if out: t["output_bytes"] = out
    if foot: t["memory_footprint"] = foot
    return t
G = P  # per-task overrides for tuning
prims = [
  {"id": "vio", "aliases": ["v"], "sensors": [{"sensor": "greyscale", "divisor": 3}, "imu"], "offload_compression": 10,
   "signal_rate": 6*4*800,
   "on_device_graph": {"id": "vio_graph", "trigger": {"sensor": "greyscale", "divisor": 3}, "tasks": [
      task("features", "cv_accel", G.get("vio_feat", 3.0e6), mem="lpddr", out=200e3, foot=1.2e6),
      task("imu_integrate", "cpu_cluster", 0.3e6, mem="sram", out=2e3, foot=64e3),
      task("to_cpu", "noc", 200e3, ["features"]),
      task("backend", "cpu_cluster", G.get("vio_be", 0.9e6), ["to_cpu", "imu_integrate"], mem="sram", out=1e3, foot=512e3),
   ]}},
  {"id": "hand_tracking", "aliases": ["ht"], "sensors": ["greyscale"], "offload_compression": 10,
   "signal_rate": 2*21*3*4*30,
   "on_device_graph": {"id": "ht_graph", "trigger": {"sensor": "greyscale", "divisor": 1}, "tasks": [
      task("detect", "npu", G.get("ht_det", 1.5e6), mem="lpddr", out=300e3, foot=2e6),
      task("crop", "noc", 300e3, ["detect"]),
      task("keypoints", "npu", G.get("ht_kp", 2.5e6), ["crop"], mem="lpddr", out=20e3, foot=1.5e6),
      task("pose_fit", "cpu_cluster", G.get("ht_pose", 1.0e6), ["keypoints"], mem="sram", out=1e3, foot=128e3),
   ]}},
  {"id": "eye_tracking", "aliases": ["et"], "sensors": ["et"], "offload_compression": 10,
   "signal_rate": 2*3*4*30,
   "on_device_graph": {"id": "et_graph", "trigger": {"sensor": "et", "divisor": 1}, "tasks": [
      task("segment", "cv_accel", G.get("et_seg", 6.0e6), mem="lpddr", out=76.8e3, foot=0.5e6),
      task("gaze_net", "npu", G.get("et_net", 2.0e6), ["segment"], mem="sram", out=1e3, foot=256e3),
   ]}},
  {"id": "asr", "aliases": ["a"], "sensors": ["mic"], "offload_compression": 6,
   "signal_rate": 50,
   "on_device_graph": {"id": "asr_graph", "trigger": {"sensor": "mic", "divisor": 480}, "tasks": [
      task("vad", "audio_dsp", G.get("asr_vad", 2.0e6), mem="sram", out=2e3, foot=64e3),
      task("encoder", "npu", G.get("asr_enc", 2.5e6), ["vad"], mem="lpddr", out=40e3, foot=8e6),
      task("decoder", "cpu_cluster", G.get("asr_dec", 0.3e6), ["encoder"], mem="sram", out=256, foot=256e3),
   ]}},
  {"id": "object_recognition", "sensors": ["rgb"], "offload_compression": 10, "forced": "offload"},
  {"id": "ambient_context", "sensors": ["gnss", "magnetometer", "barometer"], "offload_compression": 1, "forced": "offload"},
]
scenario = {
  "devices": devices, "rails": rails, "sensors": sensors, "primitives": prims,
  "radio": {"id": "wifi_mcs8", "device": "wifi_bt_radio", "throughput_bps": 100e6, "maintenance_power_mw": G["radio_maint"],
            "tx_energy_per_byte_nj": G["radio_epb"], "max_bandwidth_bps": 80e6},
  "radio_profiles": [{"id": "bluetooth", "device": "wifi_bt_radio", "throughput_bps": 2e6, "maintenance_power_mw": 12.0,
            "tx_energy_per_byte_nj": 40.0, "max_bandwidth_bps": 2e6}],
  "fallback": {"profile": "bluetooth", "threshold_bps": 1e6},
  "placement": {p["id"]: "offload" for p in prims},
  "duration_s": 60,
  "battery": {"capacity_wh": 3, "target_hours": 15},
  "thermal_limit_mw": 2000,
}
with open(sys.argv[1] if len(sys.argv) > 1 else "data/aria2_like.scenario", "w") as f:
    json.dump(scenario, f, indent=1)
    f.write("\n")
