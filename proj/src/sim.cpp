#include "wearsim/sim.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>

namespace wearsim {

double DeviceTimeline::total_seconds() const {
    double total = 0.0;
    for (const auto& [_, s] : state_seconds) total += s;
    return total;
}

RadioSchedule radio_schedule(double demand_bytes_per_s, const RadioProfile& profile) {
    if (!(demand_bytes_per_s >= 0.0)) throw std::invalid_argument("upload demand must be >= 0");
    const double bits = 8.0 * demand_bytes_per_s;
    return {std::min(1.0, bits / profile.throughput_bps), bits <= profile.max_bandwidth_bps};
}

std::map<std::string, std::map<std::string, double>> duty_cycles(const SimTrace& trace) {
    std::map<std::string, std::map<std::string, double>> out;
    for (const auto& [id, tl] : trace.timelines) {
        auto& fractions = out[id];
        for (const auto& [state, secs] : tl.state_seconds) fractions[state] = secs / trace.duration_s;
    }
    return out;
}

namespace {

struct Job {
    bool upload = false;
    int graph = 0;
    std::int64_t firing = 0;
    int task = 0;
    double bytes = 0.0;     // payload moved when the job completes
    double seconds = 0.0;   // service time
};

// FIFO by enqueue time, ties broken by (graph rank, task rank), then arrival.
using QueueKey = std::tuple<double, int, int, std::int64_t, std::uint64_t>;

struct DeviceState {
    const Device* device = nullptr;
    std::map<QueueKey, Job> queue;
    bool busy = false;
    bool start_pending = false;
    Job current;
    double current_start = 0.0;
    double busy_seconds = 0.0;
    double last_busy_end = -1.0;
    double live_memory = 0.0;
    bool overcommit_reported = false;
    DeviceTimeline timeline;
    double segment_start = 0.0;
};

struct GraphRuntime {
    const Primitive* primitive = nullptr;
    const TaskGraph* graph = nullptr;
    int rank = 0;
    std::vector<int> task_device;
    std::vector<int> task_memory;  // -1 when none
    std::vector<int> task_rank;
    std::vector<std::vector<int>> dependents;
    std::vector<int> dep_count;
    double period = 0.0;
    double deadline = 0.0;
    double signal_bytes_per_firing = 0.0;
};

struct FiringState {
    double trigger_time = 0.0;
    std::vector<int> remaining_deps;
    int remaining_tasks = 0;
    bool late = false;
};

struct UploadRuntime {
    UploadStream stream;
    double period = 0.0;
    double bytes_per_packet = 0.0;
};

class Engine {
public:
    Engine(const Scenario& s, const SimOptions& opts) : s_(s), opts_(opts) {}

    SimTrace run() {
        setup();
        loop();
        return finish();
    }

private:
    void setup() {
        validate(s_);
        duration_ = s_.duration_s;
        trace_.duration_s = duration_;

        for (std::size_t i = 0; i < s_.devices.size(); ++i) {
            DeviceState ds;
            ds.device = &s_.devices[i];
            device_index_[s_.devices[i].id] = static_cast<int>(i);
            devices_.push_back(std::move(ds));
        }

        std::vector<const Primitive*> on_device;
        for (const auto& p : s_.primitives) {
            if (s_.placement.at(p.id) == Placement::OnDevice && p.on_device_graph) on_device.push_back(&p);
        }
        std::sort(on_device.begin(), on_device.end(), [](const Primitive* a, const Primitive* b) {
            return a->on_device_graph->id < b->on_device_graph->id;
        });
        for (std::size_t gi = 0; gi < on_device.size(); ++gi) {
            const Primitive* p = on_device[gi];
            const TaskGraph& g = *p->on_device_graph;
            GraphRuntime rt;
            rt.primitive = p;
            rt.graph = &g;
            rt.rank = static_cast<int>(gi);
            const SensorStream& trig = *s_.find_sensor(g.trigger.sensor);
            rt.period = static_cast<double>(g.trigger.divisor) / trig.rate_hz;
            rt.deadline = g.deadline_s.value_or(rt.period);
            std::map<std::string, int> task_index;
            for (std::size_t t = 0; t < g.tasks.size(); ++t) task_index[g.tasks[t].id] = static_cast<int>(t);
            std::vector<int> order(g.tasks.size());
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](int a, int b) { return g.tasks[a].id < g.tasks[b].id; });
            rt.task_rank.resize(g.tasks.size());
            for (std::size_t r = 0; r < order.size(); ++r) rt.task_rank[order[r]] = static_cast<int>(r);
            rt.dependents.resize(g.tasks.size());
            for (std::size_t t = 0; t < g.tasks.size(); ++t) {
                const Task& task = g.tasks[t];
                auto dev = device_index_.find(task.device);
                if (dev == device_index_.end()) throw SimulationError("unschedulable task '" + task.id + "': device missing");
                rt.task_device.push_back(dev->second);
                rt.task_memory.push_back(task.memory.empty() ? -1 : device_index_.at(task.memory));
                rt.dep_count.push_back(static_cast<int>(task.deps.size()));
                for (const auto& d : task.deps) rt.dependents[task_index.at(d)].push_back(static_cast<int>(t));
            }
            const double upload_scale = s_.upload.compression * static_cast<double>(s_.upload.rate_divisor);
            rt.signal_bytes_per_firing = p->signal_rate / upload_scale * rt.period;
            trace_.graph_stats[g.id];
            graphs_.push_back(std::move(rt));
        }
        firings_.resize(graphs_.size());
        latency_sum_.assign(graphs_.size(), 0.0);

        const auto plan = upload_plan(s_, s_.placement);
        if (s_.radio) {
            radio_ = device_index_.at(s_.radio->device);
            trace_.radio_device = s_.radio->device;
            const auto sched = radio_schedule(total_upload_bytes(plan), *s_.radio);
            trace_.radio_feasible = sched.feasible;
            if (!sched.feasible) {
                trace_.diagnostics.push_back("radio: upload demand exceeds max bandwidth of profile '" + s_.radio->id +
                                             "'; link saturated, excess reported as backlog");
            }
        }
        for (const auto& u : plan) {
            if (u.packet_hz <= 0.0) continue;  // signals upload on graph completion
            UploadRuntime ur{u, 1.0 / u.packet_hz, u.bytes_per_second / u.packet_hz};
            uploads_.push_back(std::move(ur));
        }

        for (std::size_t g = 0; g < graphs_.size(); ++g) schedule_trigger(static_cast<int>(g), 0);
        for (std::size_t u = 0; u < uploads_.size(); ++u) schedule_upload(static_cast<int>(u), 0);
    }

    void push(double time, EventKind kind, int source, std::int64_t firing = 0, int task = 0) {
        events_.push(Event{time, next_seq_++, kind, source, firing, task});
    }

    double trigger_time(const GraphRuntime& g, std::int64_t k) const {
        const SensorStream& trig = *s_.find_sensor(g.graph->trigger.sensor);
        return static_cast<double>(k) * static_cast<double>(g.graph->trigger.divisor) / trig.rate_hz;
    }

    void schedule_trigger(int g, std::int64_t k) {
        const double t = trigger_time(graphs_[g], k);
        if (t < duration_) push(t, EventKind::TriggerFire, g, k);
    }

    void schedule_upload(int u, std::int64_t k) {
        const double t = static_cast<double>(k) / uploads_[u].stream.packet_hz;
        if (t < duration_) push(t, EventKind::TriggerFire, -1 - u, k);
    }

    void loop() {
        while (!events_.empty()) {
            Event e = events_.top();
            if (e.time > duration_) break;
            events_.pop();
            now_ = e.time;
            switch (e.kind) {
                case EventKind::TriggerFire:
                    if (e.source >= 0) on_trigger(e.source, e.firing);
                    else on_upload(-1 - e.source, e.firing);
                    break;
                case EventKind::TaskReady: on_ready(e.source, e.firing, e.task); break;
                case EventKind::TaskStart: on_start(e.source); break;
                case EventKind::TaskEnd:
                case EventKind::TransferEnd: on_end(e.source); break;
            }
        }
    }

    void on_trigger(int g, std::int64_t k) {
        schedule_trigger(g, k + 1);
        GraphRuntime& rt = graphs_[g];
        GraphStats& stats = trace_.graph_stats[rt.graph->id];
        ++stats.firings;
        const bool backlog = !firings_[g].empty();
        if (backlog && s_.trigger_mode == TriggerMode::Drop) {
            ++stats.dropped;
            ++stats.deadline_misses;
            return;
        }
        FiringState fs;
        fs.trigger_time = now_;
        fs.remaining_deps = rt.dep_count;
        fs.remaining_tasks = static_cast<int>(rt.graph->tasks.size());
        fs.late = backlog;
        if (fs.remaining_tasks == 0) {
            complete_firing(g, fs);
            return;
        }
        firings_[g].emplace(k, std::move(fs));
        for (std::size_t t = 0; t < rt.graph->tasks.size(); ++t) {
            if (rt.dep_count[t] == 0) push(now_, EventKind::TaskReady, g, k, static_cast<int>(t));
        }
    }

    void on_upload(int u, std::int64_t k) {
        schedule_upload(u, k + 1);
        enqueue_upload(static_cast<int>(graphs_.size()) + u, k, uploads_[u].bytes_per_packet);
    }

    void enqueue_upload(int rank, std::int64_t k, double bytes) {
        if (radio_ < 0 || bytes <= 0.0) return;
        DeviceState& ds = devices_[radio_];
        Job job;
        job.upload = true;
        job.bytes = bytes;
        job.seconds = bytes / ds.device->service_rate;
        ds.timeline.bytes_enqueued += bytes;
        enqueue(radio_, QueueKey{now_, rank, 0, k, next_seq_++}, job);
    }

    void on_ready(int g, std::int64_t k, int t) {
        const GraphRuntime& rt = graphs_[g];
        const Task& task = rt.graph->tasks[t];
        const int dev = rt.task_device[t];
        DeviceState& ds = devices_[dev];
        Job job;
        job.graph = g;
        job.firing = k;
        job.task = t;
        job.seconds = task.work / ds.device->service_rate;
        if (moves_bytes(*ds.device)) {
            job.bytes = task.work;
            ds.timeline.bytes_enqueued += task.work;
        }
        enqueue(dev, QueueKey{now_, rt.rank, rt.task_rank[t], k, next_seq_++}, job);
    }

    static bool moves_bytes(const Device& d) {
        return d.category == ResourceCategory::Interconnect || d.category == ResourceCategory::Memory ||
               d.category == ResourceCategory::Storage || d.category == ResourceCategory::Radio;
    }

    void enqueue(int dev, QueueKey key, Job job) {
        DeviceState& ds = devices_[dev];
        ds.queue.emplace(key, job);
        ds.timeline.queue_peak = std::max<std::int64_t>(ds.timeline.queue_peak, static_cast<std::int64_t>(ds.queue.size()));
        if (!ds.busy && !ds.start_pending) {
            ds.start_pending = true;
            push(now_, EventKind::TaskStart, dev);
        }
    }

    void on_start(int dev) {
        DeviceState& ds = devices_[dev];
        ds.start_pending = false;
        if (ds.busy || ds.queue.empty()) return;
        auto it = ds.queue.begin();
        ds.current = it->second;
        ds.queue.erase(it);
        ds.busy = true;
        ds.current_start = now_;
        if (now_ > ds.last_busy_end || ds.timeline.busy_intervals == 0) ++ds.timeline.busy_intervals;
        segment(dev, ds.device->background_state, now_);

        if (!ds.current.upload) {
            const GraphRuntime& rt = graphs_[ds.current.graph];
            const Task& task = rt.graph->tasks[ds.current.task];
            const int mem = rt.task_memory[ds.current.task];
            if (mem >= 0 && task.memory_footprint > 0.0) acquire_memory(mem, task.memory_footprint, task.id);
        }
        const bool transfer = moves_bytes(*ds.device);
        push(now_ + ds.current.seconds, transfer ? EventKind::TransferEnd : EventKind::TaskEnd, dev);
    }

    void acquire_memory(int mem, double bytes, const std::string& task_id) {
        DeviceState& ms = devices_[mem];
        ms.live_memory += bytes;
        ms.timeline.memory_peak_bytes = std::max(ms.timeline.memory_peak_bytes, ms.live_memory);
        const double cap = ms.device->capacity_bytes;
        if (cap > 0.0 && ms.live_memory > cap) {
            const std::string msg = "memory over-commitment on '" + ms.device->id + "' (" +
                                    std::to_string(ms.live_memory) + " > " + std::to_string(cap) +
                                    " bytes) while starting task '" + task_id + "'";
            if (opts_.strict_memory) throw SimulationError(msg);
            if (!ms.overcommit_reported) {
                trace_.diagnostics.push_back("warning: " + msg);
                ms.overcommit_reported = true;
            }
        }
    }

    void on_end(int dev) {
        DeviceState& ds = devices_[dev];
        const Job job = ds.current;
        ds.busy = false;
        ds.busy_seconds += now_ - ds.current_start;
        ds.last_busy_end = now_;
        ds.timeline.bytes_moved += job.bytes;
        ++ds.timeline.jobs_completed;
        segment(dev, ds.device->busy_state, now_);

        if (!job.upload) finish_task(job);
        if (!ds.queue.empty() && !ds.start_pending) {
            ds.start_pending = true;
            push(now_, EventKind::TaskStart, dev);
        }
    }

    void finish_task(const Job& job) {
        const int g = job.graph;
        GraphRuntime& rt = graphs_[g];
        const Task& task = rt.graph->tasks[job.task];
        const int mem = rt.task_memory[job.task];
        if (mem >= 0) {
            DeviceState& ms = devices_[mem];
            ms.live_memory -= task.memory_footprint;
            ms.timeline.bytes_enqueued += task.output_bytes;
            ms.timeline.bytes_moved += task.output_bytes;
        }
        auto it = firings_[g].find(job.firing);
        FiringState& fs = it->second;
        for (int d : rt.dependents[job.task]) {
            if (--fs.remaining_deps[d] == 0) push(now_, EventKind::TaskReady, g, job.firing, d);
        }
        if (--fs.remaining_tasks == 0) {
            FiringState done = std::move(fs);
            firings_[g].erase(it);
            complete_firing(g, done);
            enqueue_upload(rt.rank, job.firing, rt.signal_bytes_per_firing);
        }
    }

    void complete_firing(int g, const FiringState& fs) {
        const GraphRuntime& rt = graphs_[g];
        GraphStats& stats = trace_.graph_stats[rt.graph->id];
        const double latency = now_ - fs.trigger_time;
        ++stats.completed;
        latency_sum_[g] += latency;
        stats.max_latency_s = std::max(stats.max_latency_s, latency);
        if (fs.late || latency > rt.deadline * (1.0 + 1e-12)) ++stats.deadline_misses;
    }

    // Closes the open segment of `dev`, which was in `state` until `until`.
    void segment(int dev, const std::string& state, double until) {
        DeviceState& ds = devices_[dev];
        const double end = std::min(until, duration_);
        if (opts_.record_segments && end > ds.segment_start) {
            auto& segs = trace_.segments;
            if (!segs.empty() && segs.back().device == ds.device->id && segs.back().state == state &&
                segs.back().end_s == ds.segment_start) {
                segs.back().end_s = end;
            } else {
                segs.push_back({ds.device->id, state, ds.segment_start, end});
            }
        }
        ds.segment_start = std::max(ds.segment_start, end);
    }

    SimTrace finish() {
        now_ = duration_;
        for (std::size_t i = 0; i < devices_.size(); ++i) {
            DeviceState& ds = devices_[i];
            if (ds.busy) {
                ds.busy_seconds += duration_ - ds.current_start;
                segment(static_cast<int>(i), ds.device->busy_state, duration_);
            } else {
                segment(static_cast<int>(i), ds.device->background_state, duration_);
            }
            DeviceTimeline& tl = ds.timeline;
            for (const auto& st : ds.device->states) tl.state_seconds[st.name] = 0.0;
            const double busy = std::min(ds.busy_seconds, duration_);
            if (busy > 0.0) tl.state_seconds[ds.device->busy_state] = busy;
            tl.state_seconds[ds.device->background_state] = duration_ - busy;
            trace_.timelines[ds.device->id] = std::move(tl);
        }
        for (std::size_t g = 0; g < graphs_.size(); ++g) {
            GraphStats& stats = trace_.graph_stats[graphs_[g].graph->id];
            if (stats.completed > 0) stats.mean_latency_s = latency_sum_[g] / static_cast<double>(stats.completed);
        }
        if (radio_ >= 0) {
            const DeviceTimeline& tl = trace_.timelines.at(s_.radio->device);
            trace_.upload_bytes = tl.bytes_moved;
            trace_.upload_backlog_bytes = tl.backlog_bytes();
        }
        return std::move(trace_);
    }

    struct Later {
        bool operator()(const Event& a, const Event& b) const { return b < a; }
    };

    const Scenario& s_;
    SimOptions opts_;
    double duration_ = 0.0;
    double now_ = 0.0;
    std::uint64_t next_seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, Later> events_;
    std::vector<DeviceState> devices_;
    std::map<std::string, int> device_index_;
    std::vector<GraphRuntime> graphs_;
    std::vector<std::map<std::int64_t, FiringState>> firings_;
    std::vector<double> latency_sum_;
    std::vector<UploadRuntime> uploads_;
    int radio_ = -1;
    SimTrace trace_;
};

}  // namespace

SimTrace run(const Scenario& scenario, const SimOptions& options) {
    return Engine(scenario, options).run();
}

}  // namespace wearsim
