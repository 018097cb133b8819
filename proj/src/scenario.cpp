#include "wearsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

namespace wearsim {

using nlohmann::json;

namespace {

constexpr std::pair<ResourceCategory, std::string_view> kCategoryNames[] = {
    {ResourceCategory::Sensor, "Sensor"},
    {ResourceCategory::Compute, "Compute"},
    {ResourceCategory::Memory, "Memory"},
    {ResourceCategory::Storage, "Storage"},
    {ResourceCategory::Interconnect, "Interconnect"},
    {ResourceCategory::Radio, "Radio"},
    {ResourceCategory::Output, "Output"},
    {ResourceCategory::PowerDelivery, "PowerDelivery"},
    {ResourceCategory::SocTopLevel, "SocTopLevel"},
};

// Reads one JSON object and remembers which keys were consumed so the
// leftovers can be reported as unknown.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string where, bool lenient)
        : j_(j), where_(std::move(where)), lenient_(lenient) {
        if (!j_.is_object()) throw ParseError(where_ + ": expected an object");
    }
    ObjectReader(const ObjectReader&) = delete;
    ObjectReader& operator=(const ObjectReader&) = delete;

    ~ObjectReader() noexcept(false) {
        if (std::uncaught_exceptions() == 0) finish();
    }

    bool has(const char* key) const { return j_.contains(key); }

    const json& raw(const char* key) {
        used_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) throw ParseError(where_ + ": missing required key '" + key + "'");
        return *it;
    }

    std::string str(const char* key) {
        const json& v = raw(key);
        if (!v.is_string()) throw ParseError(where_ + "." + key + ": expected a string");
        return v.get<std::string>();
    }
    std::string str(const char* key, std::string def) { return has(key) ? str(key) : def; }

    double num(const char* key) {
        const json& v = raw(key);
        if (!v.is_number()) throw ParseError(where_ + "." + key + ": expected a number");
        return v.get<double>();
    }
    double num(const char* key, double def) { return has(key) ? num(key) : def; }

    std::int64_t integer(const char* key) {
        const json& v = raw(key);
        if (!v.is_number_integer()) throw ParseError(where_ + "." + key + ": expected an integer");
        return v.get<std::int64_t>();
    }
    std::int64_t integer(const char* key, std::int64_t def) { return has(key) ? integer(key) : def; }

    const json& array(const char* key) {
        const json& v = raw(key);
        if (!v.is_array()) throw ParseError(where_ + "." + key + ": expected an array");
        return v;
    }

    std::vector<std::string> strings(const char* key) {
        std::vector<std::string> out;
        if (!has(key)) return out;
        for (const auto& e : array(key)) {
            if (!e.is_string()) throw ParseError(where_ + "." + key + ": expected strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    const std::string& where() const { return where_; }
    bool lenient() const { return lenient_; }

private:
    void finish() {
        if (lenient_) return;
        for (const auto& [k, _] : j_.items()) {
            if (!used_.count(k)) throw ParseError(where_ + ": unknown key '" + k + "'");
        }
    }

    const json& j_;
    std::string where_;
    bool lenient_;
    std::set<std::string> used_;
};

std::string item_where(const std::string& parent, const char* key, std::size_t i, const json& e) {
    std::string w = parent + "." + key + "[" + std::to_string(i) + "]";
    if (e.is_object() && e.contains("id") && e["id"].is_string()) w += "(" + e["id"].get<std::string>() + ")";
    return w;
}

PowerDecomposition read_decomposition(const json& j, const std::string& where, bool lenient) {
    ObjectReader r(j, where, lenient);
    PowerDecomposition d;
    d.digital_dynamic = r.num("digital_dynamic", 0.0);
    d.digital_leakage = r.num("digital_leakage", 0.0);
    d.analog = r.num("analog", 0.0);
    d.rf = r.num("rf", 0.0);
    return d;
}

Device read_device(const json& j, const std::string& where, bool lenient) {
    ObjectReader r(j, where, lenient);
    Device d;
    d.id = r.str("id");
    const std::string cat = r.str("category");
    auto parsed = parse_category(cat);
    if (!parsed) throw ParseError(where + ".category: unknown category '" + cat + "'");
    d.category = *parsed;
    const json& states = r.array("states");
    for (std::size_t i = 0; i < states.size(); ++i) {
        ObjectReader sr(states[i], where + ".states[" + std::to_string(i) + "]", lenient);
        d.states.push_back({sr.str("name"), sr.num("power_mw")});
    }
    d.energy_per_byte_nj = r.num("energy_per_byte_nj", 0.0);
    d.service_rate = r.num("service_rate", 0.0);
    d.capacity_bytes = r.num("capacity_bytes", 0.0);
    d.rail = r.str("rail");
    if (r.has("power_decomposition")) {
        d.decomposition = read_decomposition(r.raw("power_decomposition"),
                                             where + ".power_decomposition", lenient);
    }
    d.background_state = r.str("background_state", "idle");
    d.busy_state = r.str("busy_state", "active");
    return d;
}

RadioProfile read_profile(const json& j, const std::string& where, bool lenient) {
    ObjectReader r(j, where, lenient);
    RadioProfile p;
    p.id = r.str("id");
    p.device = r.str("device");
    p.throughput_bps = r.num("throughput_bps");
    p.maintenance_power_mw = r.num("maintenance_power_mw");
    p.tx_energy_per_byte_nj = r.num("tx_energy_per_byte_nj");
    p.max_bandwidth_bps = r.num("max_bandwidth_bps");
    p.tx_active_extra_mw = r.num("tx_active_extra_mw", 0.0);
    return p;
}

TaskGraph read_graph(const json& j, const std::string& where, bool lenient) {
    ObjectReader r(j, where, lenient);
    TaskGraph g;
    g.id = r.str("id");
    {
        ObjectReader tr(r.raw("trigger"), where + ".trigger", lenient);
        g.trigger.sensor = tr.str("sensor");
        g.trigger.divisor = tr.integer("divisor", 1);
    }
    if (r.has("deadline_s")) g.deadline_s = r.num("deadline_s");
    const json& tasks = r.array("tasks");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        ObjectReader tr(tasks[i], item_where(where, "tasks", i, tasks[i]), lenient);
        Task t;
        t.id = tr.str("id");
        t.device = tr.str("device");
        t.work = tr.num("work");
        t.deps = tr.strings("deps");
        t.memory_footprint = tr.num("memory_footprint", 0.0);
        t.output_bytes = tr.num("output_bytes", 0.0);
        t.memory = tr.str("memory", "");
        g.tasks.push_back(std::move(t));
    }
    return g;
}

Primitive read_primitive(const json& j, const std::string& where, bool lenient) {
    ObjectReader r(j, where, lenient);
    Primitive p;
    p.id = r.str("id");
    p.aliases = r.strings("aliases");
    const json& sensors = r.array("sensors");
    for (std::size_t i = 0; i < sensors.size(); ++i) {
        const json& e = sensors[i];
        if (e.is_string()) {
            p.sensors.push_back({e.get<std::string>(), 1});
            continue;
        }
        ObjectReader sr(e, where + ".sensors[" + std::to_string(i) + "]", lenient);
        p.sensors.push_back({sr.str("sensor"), sr.integer("divisor", 1)});
    }
    if (r.has("on_device_graph")) p.on_device_graph = read_graph(r.raw("on_device_graph"), where + ".on_device_graph", lenient);
    p.signal_rate = r.num("signal_rate", 0.0);
    p.offload_compression = r.num("offload_compression", 1.0);
    const std::string forced = r.str("forced", "none");
    if (forced == "none") p.forced = Forced::None;
    else if (forced == "offload") p.forced = Forced::Offload;
    else if (forced == "on_device") p.forced = Forced::OnDevice;
    else throw ParseError(where + ".forced: expected none, offload or on_device");
    return p;
}

Placement parse_placement(const json& v, const std::string& where) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "on_device") return Placement::OnDevice;
        if (s == "offload") return Placement::Offload;
    }
    throw ParseError(where + ": expected 'on_device' or 'offload'");
}

Scenario read_scenario(const json& j, bool lenient) {
    ObjectReader r(j, "scenario", lenient);
    Scenario s;
    {
        const json& a = r.array("devices");
        for (std::size_t i = 0; i < a.size(); ++i) s.devices.push_back(read_device(a[i], item_where("scenario", "devices", i, a[i]), lenient));
    }
    {
        const json& a = r.array("rails");
        for (std::size_t i = 0; i < a.size(); ++i) {
            ObjectReader rr(a[i], item_where("scenario", "rails", i, a[i]), lenient);
            s.rails.push_back({rr.str("id"), rr.num("efficiency"), rr.str("parent")});
        }
    }
    {
        const json& a = r.array("sensors");
        for (std::size_t i = 0; i < a.size(); ++i) {
            ObjectReader sr(a[i], item_where("scenario", "sensors", i, a[i]), lenient);
            SensorStream st;
            st.id = sr.str("id");
            st.device = sr.str("device");
            st.width = sr.integer("width", 1);
            st.height = sr.integer("height", 1);
            st.channels = sr.integer("channels", 1);
            st.bit_depth = sr.integer("bit_depth");
            st.rate_hz = sr.num("rate_hz");
            s.sensors.push_back(std::move(st));
        }
    }
    {
        const json& a = r.array("primitives");
        for (std::size_t i = 0; i < a.size(); ++i) s.primitives.push_back(read_primitive(a[i], item_where("scenario", "primitives", i, a[i]), lenient));
    }
    if (r.has("radio")) s.radio = read_profile(r.raw("radio"), "scenario.radio", lenient);
    if (r.has("radio_profiles")) {
        const json& a = r.array("radio_profiles");
        for (std::size_t i = 0; i < a.size(); ++i) s.radio_profiles.push_back(read_profile(a[i], item_where("scenario", "radio_profiles", i, a[i]), lenient));
    }
    if (r.has("fallback")) {
        ObjectReader fr(r.raw("fallback"), "scenario.fallback", lenient);
        s.fallback = Fallback{fr.str("profile"), fr.num("threshold_bps", 1e6)};
    }
    if (r.has("upload")) {
        ObjectReader ur(r.raw("upload"), "scenario.upload", lenient);
        s.upload.compression = ur.num("compression", 1.0);
        s.upload.rate_divisor = ur.integer("rate_divisor", 1);
        s.upload.batch_hz = ur.num("batch_hz", 50.0);
    }
    {
        const json& p = r.raw("placement");
        if (!p.is_object()) throw ParseError("scenario.placement: expected an object");
        for (const auto& [k, v] : p.items()) s.placement[k] = parse_placement(v, "scenario.placement." + k);
    }
    const std::string mode = r.str("trigger_mode", "queue");
    if (mode == "queue") s.trigger_mode = TriggerMode::Queue;
    else if (mode == "drop") s.trigger_mode = TriggerMode::Drop;
    else throw ParseError("scenario.trigger_mode: expected 'queue' or 'drop'");
    s.duration_s = r.num("duration_s");
    {
        ObjectReader br(r.raw("battery"), "scenario.battery", lenient);
        s.battery.capacity_wh = br.num("capacity_wh");
        s.battery.target_hours = br.num("target_hours");
    }
    s.thermal_limit_mw = r.num("thermal_limit_mw", 2000.0);
    return s;
}

json profile_json(const RadioProfile& p) {
    json j{{"id", p.id},
           {"device", p.device},
           {"throughput_bps", p.throughput_bps},
           {"maintenance_power_mw", p.maintenance_power_mw},
           {"tx_energy_per_byte_nj", p.tx_energy_per_byte_nj},
           {"max_bandwidth_bps", p.max_bandwidth_bps}};
    if (p.tx_active_extra_mw != 0.0) j["tx_active_extra_mw"] = p.tx_active_extra_mw;
    return j;
}

template <class T, class Id>
void check_unique(const std::vector<T>& items, Id id_of, const char* what) {
    std::set<std::string> seen;
    for (const auto& it : items) {
        const std::string& id = id_of(it);
        if (id.empty()) throw ValidationError("", std::string("empty ") + what + " id");
        if (!seen.insert(id).second) throw ValidationError(id, std::string("duplicate ") + what + " id");
    }
}

void validate_graph(const Scenario& s, const TaskGraph& g) {
    if (!s.find_sensor(g.trigger.sensor)) throw ValidationError(g.id, "trigger references unknown sensor '" + g.trigger.sensor + "'");
    if (g.trigger.divisor < 1) throw ValidationError(g.id, "trigger divisor must be >= 1");
    if (g.deadline_s && !(*g.deadline_s > 0.0)) throw ValidationError(g.id, "deadline must be > 0");
    check_unique(g.tasks, [](const Task& t) -> const std::string& { return t.id; }, "task");

    std::map<std::string, const Task*> by_id;
    for (const auto& t : g.tasks) by_id[t.id] = &t;
    for (const auto& t : g.tasks) {
        const Device* d = s.find_device(t.device);
        if (!d) throw ValidationError(t.id, "task references unknown device '" + t.device + "'");
        if (!(d->service_rate > 0.0)) throw ValidationError(d->id, "service_rate must be > 0 for devices used by tasks");
        if (!d->find_state(d->busy_state)) throw ValidationError(d->id, "missing busy state '" + d->busy_state + "'");
        if (d->category == ResourceCategory::Radio) throw ValidationError(t.id, "tasks may not run on the radio device");
        if (!(t.work >= 0.0) || !(t.memory_footprint >= 0.0) || !(t.output_bytes >= 0.0))
            throw ValidationError(t.id, "work, memory_footprint and output_bytes must be >= 0");
        if (!t.memory.empty()) {
            const Device* m = s.find_device(t.memory);
            if (!m) throw ValidationError(t.id, "task references unknown memory '" + t.memory + "'");
            if (m->category != ResourceCategory::Memory && m->category != ResourceCategory::Storage)
                throw ValidationError(t.id, "memory '" + t.memory + "' is not a Memory/Storage device");
        }
        for (const auto& dep : t.deps) {
            if (!by_id.count(dep)) throw ValidationError(t.id, "dependency on unknown task '" + dep + "'");
        }
    }
    // Cycle check by DFS colouring.
    std::map<std::string, int> colour;
    std::function<void(const Task&)> visit = [&](const Task& t) {
        colour[t.id] = 1;
        for (const auto& dep : t.deps) {
            int c = colour[dep];
            if (c == 1) throw ValidationError(t.id, "cyclic task dependency through '" + dep + "' in graph " + g.id);
            if (c == 0) visit(*by_id[dep]);
        }
        colour[t.id] = 2;
    };
    for (const auto& t : g.tasks) {
        if (colour[t.id] == 0) visit(t);
    }
}

void validate_profile(const Scenario& s, const RadioProfile& p) {
    if (!(p.throughput_bps > 0.0)) throw ValidationError(p.id, "throughput must be > 0");
    if (!(p.maintenance_power_mw >= 0.0)) throw ValidationError(p.id, "maintenance power must be >= 0");
    if (!(p.tx_energy_per_byte_nj >= 0.0)) throw ValidationError(p.id, "tx energy per byte must be >= 0");
    if (!(p.max_bandwidth_bps > 0.0)) throw ValidationError(p.id, "max bandwidth must be > 0");
    if (!(p.tx_active_extra_mw >= 0.0)) throw ValidationError(p.id, "tx active extra power must be >= 0");
    const Device* d = s.find_device(p.device);
    if (!d) throw ValidationError(p.id, "radio profile references unknown device '" + p.device + "'");
    if (d->category != ResourceCategory::Radio) throw ValidationError(p.id, "radio device '" + p.device + "' is not category Radio");
}

}  // namespace

std::string_view to_string(ResourceCategory c) {
    for (const auto& [k, v] : kCategoryNames) {
        if (k == c) return v;
    }
    return "?";
}

std::optional<ResourceCategory> parse_category(std::string_view s) {
    for (const auto& [k, v] : kCategoryNames) {
        if (v == s) return k;
    }
    return std::nullopt;
}

std::string_view to_string(PowerType t) {
    switch (t) {
        case PowerType::DigitalDynamic: return "digital_dynamic";
        case PowerType::DigitalLeakage: return "digital_leakage";
        case PowerType::Analog: return "analog";
        case PowerType::Rf: return "rf";
    }
    return "?";
}

std::string_view to_string(Placement p) { return p == Placement::OnDevice ? "on_device" : "offload"; }

std::string_view to_string(Forced f) {
    switch (f) {
        case Forced::None: return "none";
        case Forced::Offload: return "offload";
        case Forced::OnDevice: return "on_device";
    }
    return "?";
}

double PowerDecomposition::fraction(PowerType t) const {
    switch (t) {
        case PowerType::DigitalDynamic: return digital_dynamic;
        case PowerType::DigitalLeakage: return digital_leakage;
        case PowerType::Analog: return analog;
        case PowerType::Rf: return rf;
    }
    return 0.0;
}

const PowerState* Device::find_state(std::string_view name) const {
    for (const auto& st : states) {
        if (st.name == name) return &st;
    }
    return nullptr;
}

double SensorStream::raw_bits_per_second() const {
    return static_cast<double>(width) * static_cast<double>(height) * static_cast<double>(channels) *
           static_cast<double>(bit_depth) * rate_hz;
}

double RadioProfile::power_at(double bits_per_second) const {
    const double bytes_per_s = bits_per_second / 8.0;
    const double duty = std::min(1.0, bits_per_second / throughput_bps);
    return maintenance_power_mw + tx_active_extra_mw * duty + bytes_per_s * tx_energy_per_byte_nj * 1e-6;
}

namespace {
template <class T>
const T* find_by_id(const std::vector<T>& v, std::string_view id) {
    for (const auto& x : v) {
        if (x.id == id) return &x;
    }
    return nullptr;
}
}  // namespace

const Device* Scenario::find_device(std::string_view id) const { return find_by_id(devices, id); }
const RailNode* Scenario::find_rail(std::string_view id) const { return find_by_id(rails, id); }
const SensorStream* Scenario::find_sensor(std::string_view id) const { return find_by_id(sensors, id); }
const Primitive* Scenario::find_primitive(std::string_view id) const { return find_by_id(primitives, id); }

const RadioProfile* Scenario::find_profile(std::string_view id) const {
    if (radio && radio->id == id) return &*radio;
    return find_by_id(radio_profiles, id);
}

const Primitive* Scenario::resolve_primitive(std::string_view id_or_alias) const {
    if (const Primitive* p = find_primitive(id_or_alias)) return p;
    for (const auto& p : primitives) {
        if (std::find(p.aliases.begin(), p.aliases.end(), id_or_alias) != p.aliases.end()) return &p;
    }
    return nullptr;
}

Scenario parse_scenario(std::string_view text, LoadOptions opts) {
    json j;
    try {
        j = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed scenario document: ") + e.what());
    }
    Scenario s;
    try {
        s = read_scenario(j, opts.lenient);
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario schema error: ") + e.what());
    }
    validate(s);
    if (s.radio) {
        const RadioProfile active = *s.radio;
        s = with_radio(std::move(s), active);
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path, LoadOptions opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read scenario file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading scenario file '" + path.string() + "'");
    return parse_scenario(ss.str(), opts);
}

std::string serialize_scenario(const Scenario& s) {
    json j;
    j["devices"] = json::array();
    for (const auto& d : s.devices) {
        json dj{{"id", d.id}, {"category", std::string(to_string(d.category))}, {"rail", d.rail}};
        dj["states"] = json::array();
        for (const auto& st : d.states) dj["states"].push_back({{"name", st.name}, {"power_mw", st.power_mw}});
        if (d.energy_per_byte_nj != 0.0) dj["energy_per_byte_nj"] = d.energy_per_byte_nj;
        if (d.service_rate != 0.0) dj["service_rate"] = d.service_rate;
        if (d.capacity_bytes != 0.0) dj["capacity_bytes"] = d.capacity_bytes;
        if (d.decomposition) {
            dj["power_decomposition"] = {{"digital_dynamic", d.decomposition->digital_dynamic},
                                         {"digital_leakage", d.decomposition->digital_leakage},
                                         {"analog", d.decomposition->analog},
                                         {"rf", d.decomposition->rf}};
        }
        if (d.background_state != "idle") dj["background_state"] = d.background_state;
        if (d.busy_state != "active") dj["busy_state"] = d.busy_state;
        j["devices"].push_back(std::move(dj));
    }
    j["rails"] = json::array();
    for (const auto& r : s.rails) j["rails"].push_back({{"id", r.id}, {"efficiency", r.efficiency}, {"parent", r.parent}});
    j["sensors"] = json::array();
    for (const auto& st : s.sensors) {
        j["sensors"].push_back({{"id", st.id},
                                {"device", st.device},
                                {"width", st.width},
                                {"height", st.height},
                                {"channels", st.channels},
                                {"bit_depth", st.bit_depth},
                                {"rate_hz", st.rate_hz}});
    }
    j["primitives"] = json::array();
    for (const auto& p : s.primitives) {
        json pj{{"id", p.id}, {"signal_rate", p.signal_rate}, {"offload_compression", p.offload_compression},
                {"forced", std::string(to_string(p.forced))}};
        if (!p.aliases.empty()) pj["aliases"] = p.aliases;
        pj["sensors"] = json::array();
        for (const auto& u : p.sensors) pj["sensors"].push_back({{"sensor", u.sensor}, {"divisor", u.divisor}});
        if (p.on_device_graph) {
            const auto& g = *p.on_device_graph;
            json gj{{"id", g.id}, {"trigger", {{"sensor", g.trigger.sensor}, {"divisor", g.trigger.divisor}}}};
            if (g.deadline_s) gj["deadline_s"] = *g.deadline_s;
            gj["tasks"] = json::array();
            for (const auto& t : g.tasks) {
                json tj{{"id", t.id}, {"device", t.device}, {"work", t.work}, {"deps", t.deps}};
                if (t.memory_footprint != 0.0) tj["memory_footprint"] = t.memory_footprint;
                if (t.output_bytes != 0.0) tj["output_bytes"] = t.output_bytes;
                if (!t.memory.empty()) tj["memory"] = t.memory;
                gj["tasks"].push_back(std::move(tj));
            }
            pj["on_device_graph"] = std::move(gj);
        }
        j["primitives"].push_back(std::move(pj));
    }
    if (s.radio) j["radio"] = profile_json(*s.radio);
    if (!s.radio_profiles.empty()) {
        j["radio_profiles"] = json::array();
        for (const auto& p : s.radio_profiles) j["radio_profiles"].push_back(profile_json(p));
    }
    if (s.fallback) j["fallback"] = {{"profile", s.fallback->profile}, {"threshold_bps", s.fallback->threshold_bps}};
    j["upload"] = {{"compression", s.upload.compression},
                   {"rate_divisor", s.upload.rate_divisor},
                   {"batch_hz", s.upload.batch_hz}};
    j["placement"] = json::object();
    for (const auto& [k, v] : s.placement) j["placement"][k] = std::string(to_string(v));
    j["trigger_mode"] = s.trigger_mode == TriggerMode::Queue ? "queue" : "drop";
    j["duration_s"] = s.duration_s;
    j["battery"] = {{"capacity_wh", s.battery.capacity_wh}, {"target_hours", s.battery.target_hours}};
    j["thermal_limit_mw"] = s.thermal_limit_mw;
    return j.dump(2) + "\n";
}

void validate(const Scenario& s) {
    check_unique(s.devices, [](const Device& d) -> const std::string& { return d.id; }, "device");
    check_unique(s.rails, [](const RailNode& r) -> const std::string& { return r.id; }, "rail");
    check_unique(s.sensors, [](const SensorStream& x) -> const std::string& { return x.id; }, "sensor");
    check_unique(s.primitives, [](const Primitive& p) -> const std::string& { return p.id; }, "primitive");

    if (!(s.duration_s > 0.0)) throw ValidationError("duration_s", "duration must be > 0");
    if (!(s.battery.capacity_wh > 0.0)) throw ValidationError("battery", "capacity_wh must be > 0");
    if (!(s.battery.target_hours > 0.0)) throw ValidationError("battery", "target_hours must be > 0");
    if (!(s.thermal_limit_mw > 0.0)) throw ValidationError("thermal_limit_mw", "thermal limit must be > 0");

    // Rail tree.
    for (const auto& r : s.rails) {
        if (r.id == kBatteryRail) throw ValidationError(r.id, "'battery' is the implicit root and cannot be declared");
        if (!(r.efficiency > 0.0 && r.efficiency <= 1.0)) throw ValidationError(r.id, "efficiency must lie in (0, 1]");
        if (r.parent != kBatteryRail && !s.find_rail(r.parent))
            throw ValidationError(r.id, "parent references unknown rail '" + r.parent + "'");
    }
    for (const auto& r : s.rails) {
        std::set<std::string> seen{r.id};
        const RailNode* cur = &r;
        while (cur->parent != kBatteryRail) {
            if (!seen.insert(cur->parent).second) throw ValidationError(r.id, "rail cycle through '" + cur->parent + "'");
            cur = s.find_rail(cur->parent);
        }
    }

    for (const auto& d : s.devices) {
        if (d.rail != kBatteryRail && !s.find_rail(d.rail))
            throw ValidationError(d.id, "rail references unknown rail '" + d.rail + "'");
        std::set<std::string> names;
        for (const auto& st : d.states) {
            if (!names.insert(st.name).second) throw ValidationError(d.id, "duplicate state '" + st.name + "'");
            if (!(st.power_mw >= 0.0)) throw ValidationError(d.id, "state '" + st.name + "' has negative power");
        }
        if (!names.count("idle")) throw ValidationError(d.id, "device has no 'idle' state");
        if (d.category != ResourceCategory::Radio && !names.count(d.background_state))
            throw ValidationError(d.id, "background state '" + d.background_state + "' is not declared");
        if (!(d.energy_per_byte_nj >= 0.0)) throw ValidationError(d.id, "energy_per_byte_nj must be >= 0");
        if (!(d.service_rate >= 0.0)) throw ValidationError(d.id, "service_rate must be >= 0");
        if (!(d.capacity_bytes >= 0.0)) throw ValidationError(d.id, "capacity_bytes must be >= 0");
        if (d.category == ResourceCategory::PowerDelivery)
            throw ValidationError(d.id, "PowerDelivery is reserved for rail losses");
        if (d.decomposition) {
            const auto& dc = *d.decomposition;
            for (PowerType t : kAllPowerTypes) {
                const double f = dc.fraction(t);
                if (!(f >= 0.0 && f <= 1.0)) throw ValidationError(d.id, "power decomposition fraction outside [0, 1]");
            }
            if (std::abs(dc.sum() - 1.0) > 1e-9) throw ValidationError(d.id, "power decomposition does not sum to 1");
        }
    }

    for (const auto& st : s.sensors) {
        const Device* d = s.find_device(st.device);
        if (!d) throw ValidationError(st.id, "sensor references unknown device '" + st.device + "'");
        if (d->category != ResourceCategory::Sensor) throw ValidationError(st.id, "device '" + st.device + "' is not category Sensor");
        if (st.width < 1 || st.height < 1 || st.channels < 1 || st.bit_depth < 1)
            throw ValidationError(st.id, "width, height, channels and bit_depth must be >= 1");
        if (!(st.rate_hz > 0.0)) throw ValidationError(st.id, "rate must be > 0");
    }

    std::set<std::string> aliases;
    for (const auto& p : s.primitives) {
        for (const auto& a : p.aliases) {
            if (s.find_primitive(a) || !aliases.insert(a).second) throw ValidationError(p.id, "alias '" + a + "' is ambiguous");
        }
        if (!(p.offload_compression >= 1.0)) throw ValidationError(p.id, "offload_compression must be >= 1");
        if (!(p.signal_rate >= 0.0)) throw ValidationError(p.id, "signal_rate must be >= 0");
        double compressed = 0.0;
        for (const auto& u : p.sensors) {
            const SensorStream* st = s.find_sensor(u.sensor);
            if (!st) throw ValidationError(p.id, "primitive references unknown sensor '" + u.sensor + "'");
            if (u.divisor < 1) throw ValidationError(p.id, "sensor divisor must be >= 1");
            compressed += sensor_bandwidth(*st, p.offload_compression, static_cast<double>(u.divisor)) / 8.0;
        }
        if (p.on_device_graph) {
            validate_graph(s, *p.on_device_graph);
            if (p.signal_rate > compressed * (1.0 + 1e-12))
                throw ValidationError(p.id, "signal_rate exceeds the compressed bandwidth of its sensors");
        } else if (p.forced != Forced::Offload) {
            throw ValidationError(p.id, "primitive without an on-device graph must be forced to offload");
        }
    }
    {
        std::set<std::string> graph_ids;
        for (const auto& p : s.primitives) {
            if (p.on_device_graph && !graph_ids.insert(p.on_device_graph->id).second)
                throw ValidationError(p.on_device_graph->id, "duplicate taskgraph id");
        }
    }

    for (const auto& [id, _] : s.placement) {
        if (!s.find_primitive(id)) throw ValidationError(id, "placement references unknown primitive");
    }
    check_placement(s, s.placement);

    if (s.radio) validate_profile(s, *s.radio);
    for (const auto& p : s.radio_profiles) validate_profile(s, p);
    {
        std::set<std::string> ids;
        if (s.radio) ids.insert(s.radio->id);
        for (const auto& p : s.radio_profiles) {
            if (!ids.insert(p.id).second) throw ValidationError(p.id, "duplicate radio profile id");
        }
    }
    if (s.fallback) {
        const RadioProfile* fb = s.find_profile(s.fallback->profile);
        if (!fb) throw ValidationError("fallback", "unknown radio profile '" + s.fallback->profile + "'");
        if (!(s.fallback->threshold_bps > 0.0)) throw ValidationError("fallback", "threshold must be > 0");
        if (fb->max_bandwidth_bps < s.fallback->threshold_bps)
            throw ValidationError(fb->id, "fallback max bandwidth is below the fallback threshold");
    }
    if (!(s.upload.compression >= 1.0)) throw ValidationError("upload", "compression must be >= 1");
    if (s.upload.rate_divisor < 1) throw ValidationError("upload", "rate_divisor must be >= 1");
    if (!(s.upload.batch_hz > 0.0)) throw ValidationError("upload", "batch_hz must be > 0");

    const bool uploads = std::any_of(s.primitives.begin(), s.primitives.end(), [&](const Primitive& p) {
        return s.placement.at(p.id) == Placement::Offload || p.signal_rate > 0.0;
    });
    if (uploads && !s.radio) throw ValidationError("radio", "scenario uploads data but declares no radio profile");
}

void check_placement(const Scenario& s, const PlacementConfig& placement) {
    for (const auto& p : s.primitives) {
        auto it = placement.find(p.id);
        if (it == placement.end()) throw ValidationError(p.id, "primitive has no placement");
        if (p.forced == Forced::Offload && it->second != Placement::Offload)
            throw ValidationError(p.id, "primitive is forced to offload");
        if (p.forced == Forced::OnDevice && it->second != Placement::OnDevice)
            throw ValidationError(p.id, "primitive is forced on-device");
    }
}

Scenario with_radio(Scenario s, const RadioProfile& profile) {
    std::set<std::string> link_devices;
    if (s.radio) link_devices.insert(s.radio->device);
    for (const auto& p : s.radio_profiles) link_devices.insert(p.device);
    for (auto& d : s.devices) {
        if (d.id == profile.device) {
            d.states = {{"idle", 0.0},
                        {"maintain", profile.maintenance_power_mw},
                        {"tx", profile.maintenance_power_mw + profile.tx_active_extra_mw}};
            d.background_state = "maintain";
            d.busy_state = "tx";
            d.energy_per_byte_nj = profile.tx_energy_per_byte_nj;
            d.service_rate = profile.throughput_bps / 8.0;
        } else if (link_devices.count(d.id)) {
            // Radios of inactive profiles are powered down.
            d.states = {{"idle", 0.0}};
            d.background_state = "idle";
            d.busy_state = "active";
            d.energy_per_byte_nj = 0.0;
        }
    }
    if (s.radio && s.radio->id != profile.id) {
        s.radio_profiles.push_back(*s.radio);
    }
    std::erase_if(s.radio_profiles, [&](const RadioProfile& p) { return p.id == profile.id; });
    s.radio = profile;
    return s;
}

double sensor_bandwidth(const SensorStream& stream, double compression, double rate_divisor) {
    if (!(compression >= 1.0)) throw std::invalid_argument("compression must be >= 1");
    if (!(rate_divisor >= 1.0)) throw std::invalid_argument("rate divisor must be >= 1");
    return static_cast<double>(stream.width) * static_cast<double>(stream.height) *
           static_cast<double>(stream.channels) * static_cast<double>(stream.bit_depth) *
           (stream.rate_hz / rate_divisor) / compression;
}

double power_budget(const Battery& battery) {
    if (!(battery.capacity_wh > 0.0) || !(battery.target_hours > 0.0))
        throw std::invalid_argument("battery capacity and target hours must be > 0");
    return 1000.0 * battery.capacity_wh / battery.target_hours;
}

PlacementConfig full_offload(const Scenario& s) {
    PlacementConfig out;
    for (const auto& p : s.primitives) out[p.id] = p.forced == Forced::OnDevice ? Placement::OnDevice : Placement::Offload;
    return out;
}

PlacementConfig full_on_device(const Scenario& s) {
    PlacementConfig out;
    for (const auto& p : s.primitives) out[p.id] = p.forced == Forced::Offload ? Placement::Offload : Placement::OnDevice;
    return out;
}

namespace {

struct SensorDemand {
    double bits_per_second = 0.0;
    double packet_hz = 0.0;
    std::string owner;  // primitive the stream is attributed to
};

// Offloaded sensor streams, each counted once at the highest demanded rate.
std::map<std::string, SensorDemand> offloaded_sensor_demand(const Scenario& s, const PlacementConfig& placement) {
    std::map<std::string, SensorDemand> demand;
    const double extra_div = static_cast<double>(s.upload.rate_divisor);
    for (const auto& p : s.primitives) {
        if (placement.at(p.id) != Placement::Offload) continue;
        for (const auto& u : p.sensors) {
            const SensorStream& st = *s.find_sensor(u.sensor);
            const double div = static_cast<double>(u.divisor) * extra_div;
            const double bps = sensor_bandwidth(st, p.offload_compression * s.upload.compression, div);
            auto [it, inserted] = demand.try_emplace(st.id);
            // Ties go to the lexicographically first primitive id.
            if (inserted || bps > it->second.bits_per_second ||
                (bps == it->second.bits_per_second && p.id < it->second.owner)) {
                it->second = {bps, std::min(st.rate_hz / div, s.upload.batch_hz), p.id};
            }
        }
    }
    return demand;
}

double signal_bytes(const Scenario& s, const Primitive& p) {
    return p.signal_rate / (s.upload.compression * static_cast<double>(s.upload.rate_divisor));
}

}  // namespace

std::map<std::string, double> effective_upload_bytes(const Scenario& s, const PlacementConfig& placement) {
    check_placement(s, placement);
    std::map<std::string, double> out;
    for (const auto& p : s.primitives) out[p.id] = 0.0;
    for (const auto& [sensor, d] : offloaded_sensor_demand(s, placement)) out[d.owner] += d.bits_per_second / 8.0;
    for (const auto& p : s.primitives) {
        if (placement.at(p.id) == Placement::OnDevice) out[p.id] += signal_bytes(s, p);
    }
    return out;
}

std::vector<UploadStream> upload_plan(const Scenario& s, const PlacementConfig& placement) {
    check_placement(s, placement);
    std::vector<UploadStream> plan;
    for (const auto& [sensor, d] : offloaded_sensor_demand(s, placement)) {
        if (d.bits_per_second > 0.0) plan.push_back({sensor, d.bits_per_second / 8.0, d.packet_hz, ""});
    }
    for (const auto& p : s.primitives) {
        if (placement.at(p.id) == Placement::OnDevice && p.signal_rate > 0.0)
            plan.push_back({p.id + ".signal", signal_bytes(s, p), 0.0, p.id});
    }
    return plan;
}

double total_upload_bytes(const std::vector<UploadStream>& plan) {
    double total = 0.0;
    for (const auto& u : plan) total += u.bytes_per_second;
    return total;
}

}  // namespace wearsim
