#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "wearsim/scenario.hpp"

namespace wearsim {

enum class EventKind { TriggerFire, TaskReady, TaskStart, TaskEnd, TransferEnd };

struct Event {
    double time = 0.0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::TriggerFire;
    int source = 0;           // graph index, upload stream index or device index
    std::int64_t firing = 0;  // firing / packet number
    int task = 0;

    // Events are processed in (time, seq) order; seq is unique.
    friend bool operator<(const Event& a, const Event& b) {
        return a.time != b.time ? a.time < b.time : a.seq < b.seq;
    }
};

struct DeviceTimeline {
    std::map<std::string, double> state_seconds;
    double bytes_moved = 0.0;
    // Bytes handed to the device for transfer; the remainder after
    // bytes_moved is still queued or in flight at the end of the run.
    double bytes_enqueued = 0.0;
    std::int64_t queue_peak = 0;
    std::int64_t busy_intervals = 0;
    std::int64_t jobs_completed = 0;
    double memory_peak_bytes = 0.0;

    double backlog_bytes() const { return bytes_enqueued - bytes_moved; }
    double total_seconds() const;
};

struct GraphStats {
    std::int64_t firings = 0;
    std::int64_t completed = 0;
    std::int64_t deadline_misses = 0;
    std::int64_t dropped = 0;
    double mean_latency_s = 0.0;
    double max_latency_s = 0.0;
};

struct StateSegment {
    std::string device;
    std::string state;
    double start_s = 0.0;
    double end_s = 0.0;
};

struct SimTrace {
    double duration_s = 0.0;
    std::map<std::string, DeviceTimeline> timelines;
    std::map<std::string, GraphStats> graph_stats;
    double upload_bytes = 0.0;
    double upload_backlog_bytes = 0.0;
    std::string radio_device;
    bool radio_feasible = true;
    std::vector<std::string> diagnostics;
    // Only filled when SimOptions::record_segments is set.
    std::vector<StateSegment> segments;
};

struct SimOptions {
    bool strict_memory = false;
    bool record_segments = false;
};

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Runs the scenario under its own placement and radio profile.
SimTrace run(const Scenario& scenario, const SimOptions& options = {});

std::map<std::string, std::map<std::string, double>> duty_cycles(const SimTrace& trace);

struct RadioSchedule {
    double tx_duty = 0.0;
    bool feasible = true;
};

RadioSchedule radio_schedule(double demand_bytes_per_s, const RadioProfile& profile);

}  // namespace wearsim
