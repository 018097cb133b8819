#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wearsim {

// Malformed document (syntax, wrong types, unknown keys in strict mode).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Well-formed document whose content violates a model invariant. `entity`
// names the offending id so diagnostics can point at it.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string entity, const std::string& message)
        : std::runtime_error(entity.empty() ? message : entity + ": " + message),
          entity_(std::move(entity)) {}
    const std::string& entity() const noexcept { return entity_; }

private:
    std::string entity_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ResourceCategory {
    Sensor,
    Compute,
    Memory,
    Storage,
    Interconnect,
    Radio,
    Output,
    PowerDelivery,
    SocTopLevel,
};

inline constexpr ResourceCategory kAllCategories[] = {
    ResourceCategory::Sensor,       ResourceCategory::Compute, ResourceCategory::Memory,
    ResourceCategory::Storage,      ResourceCategory::Interconnect, ResourceCategory::Radio,
    ResourceCategory::Output,       ResourceCategory::PowerDelivery,
    ResourceCategory::SocTopLevel,
};

std::string_view to_string(ResourceCategory c);
std::optional<ResourceCategory> parse_category(std::string_view s);

enum class PowerType { DigitalDynamic, DigitalLeakage, Analog, Rf };

inline constexpr PowerType kAllPowerTypes[] = {PowerType::DigitalDynamic, PowerType::DigitalLeakage,
                                               PowerType::Analog, PowerType::Rf};

std::string_view to_string(PowerType t);

struct PowerState {
    std::string name;
    double power_mw = 0.0;
    bool operator==(const PowerState&) const = default;
};

struct PowerDecomposition {
    double digital_dynamic = 0.0;
    double digital_leakage = 0.0;
    double analog = 0.0;
    double rf = 0.0;

    double fraction(PowerType t) const;
    double sum() const { return digital_dynamic + digital_leakage + analog + rf; }
    bool operator==(const PowerDecomposition&) const = default;
};

struct Device {
    std::string id;
    ResourceCategory category = ResourceCategory::Compute;
    std::vector<PowerState> states;
    double energy_per_byte_nj = 0.0;
    // work-units/s for compute, bytes/s for interconnect, memory and radio.
    double service_rate = 0.0;
    double capacity_bytes = 0.0;
    std::string rail;
    std::optional<PowerDecomposition> decomposition;
    // State occupied while not serving work, and while serving work.
    std::string background_state = "idle";
    std::string busy_state = "active";

    const PowerState* find_state(std::string_view name) const;
    bool operator==(const Device&) const = default;
};

inline constexpr std::string_view kBatteryRail = "battery";

struct RailNode {
    std::string id;
    double efficiency = 1.0;
    std::string parent{kBatteryRail};
    bool operator==(const RailNode&) const = default;
};

struct SensorStream {
    std::string id;
    std::string device;
    std::int64_t width = 1;
    std::int64_t height = 1;
    std::int64_t channels = 1;
    std::int64_t bit_depth = 8;
    double rate_hz = 1.0;

    // Uncompressed bits/s at the native rate.
    double raw_bits_per_second() const;
    bool operator==(const SensorStream&) const = default;
};

struct Task {
    std::string id;
    std::string device;
    // Work units for compute devices, payload bytes for transfer devices.
    double work = 0.0;
    std::vector<std::string> deps;
    double memory_footprint = 0.0;
    double output_bytes = 0.0;
    // Memory device that holds the footprint and receives output_bytes.
    std::string memory;
    bool operator==(const Task&) const = default;
};

struct Trigger {
    std::string sensor;
    std::int64_t divisor = 1;
    bool operator==(const Trigger&) const = default;
};

struct TaskGraph {
    std::string id;
    std::vector<Task> tasks;
    Trigger trigger;
    std::optional<double> deadline_s;
    bool operator==(const TaskGraph&) const = default;
};

struct SensorUse {
    std::string sensor;
    std::int64_t divisor = 1;
    bool operator==(const SensorUse&) const = default;
};

enum class Forced { None, Offload, OnDevice };
enum class Placement { OnDevice, Offload };

std::string_view to_string(Placement p);
std::string_view to_string(Forced f);

struct Primitive {
    std::string id;
    std::vector<std::string> aliases;
    std::vector<SensorUse> sensors;
    std::optional<TaskGraph> on_device_graph;
    double signal_rate = 0.0;  // bytes/s
    double offload_compression = 1.0;
    Forced forced = Forced::None;

    bool offloadable() const { return forced != Forced::OnDevice; }
    bool operator==(const Primitive&) const = default;
};

using PlacementConfig = std::map<std::string, Placement>;

struct RadioProfile {
    std::string id;
    std::string device;
    double throughput_bps = 0.0;
    double maintenance_power_mw = 0.0;
    double tx_energy_per_byte_nj = 0.0;
    double max_bandwidth_bps = 0.0;
    // Extra power above maintenance while actively transmitting.
    double tx_active_extra_mw = 0.0;

    // Link power at a sustained demand of `bits_per_second`.
    double power_at(double bits_per_second) const;
    bool operator==(const RadioProfile&) const = default;
};

struct Battery {
    double capacity_wh = 0.0;
    double target_hours = 0.0;
    bool operator==(const Battery&) const = default;
};

struct Fallback {
    std::string profile;
    double threshold_bps = 1e6;
    bool operator==(const Fallback&) const = default;
};

// Link-demand knobs applied on top of each primitive's own compression.
struct UploadSettings {
    double compression = 1.0;
    std::int64_t rate_divisor = 1;
    double batch_hz = 50.0;
    bool operator==(const UploadSettings&) const = default;
};

enum class TriggerMode { Queue, Drop };

struct Scenario {
    std::vector<Device> devices;
    std::vector<RailNode> rails;
    std::vector<SensorStream> sensors;
    std::vector<Primitive> primitives;
    PlacementConfig placement;
    std::optional<RadioProfile> radio;
    std::vector<RadioProfile> radio_profiles;
    std::optional<Fallback> fallback;
    UploadSettings upload;
    TriggerMode trigger_mode = TriggerMode::Queue;
    double duration_s = 60.0;
    Battery battery;
    double thermal_limit_mw = 2000.0;

    const Device* find_device(std::string_view id) const;
    const RailNode* find_rail(std::string_view id) const;
    const SensorStream* find_sensor(std::string_view id) const;
    const Primitive* find_primitive(std::string_view id) const;
    const RadioProfile* find_profile(std::string_view id) const;
    // Matches ids first, then declared aliases.
    const Primitive* resolve_primitive(std::string_view id_or_alias) const;

    bool operator==(const Scenario&) const = default;
};

struct LoadOptions {
    bool lenient = false;
};

Scenario load_scenario(const std::filesystem::path& path, LoadOptions opts = {});
Scenario parse_scenario(std::string_view text, LoadOptions opts = {});
std::string serialize_scenario(const Scenario& s);

// Throws ValidationError on the first violated invariant.
void validate(const Scenario& s);

// Installs `profile` as the active link: the radio device's states and
// per-byte energy are taken from the profile.
Scenario with_radio(Scenario s, const RadioProfile& profile);

double sensor_bandwidth(const SensorStream& stream, double compression = 1.0,
                        double rate_divisor = 1.0);

double power_budget(const Battery& battery);

// All non-forced primitives offloaded, or all non-forced primitives on-device.
PlacementConfig full_offload(const Scenario& s);
PlacementConfig full_on_device(const Scenario& s);
void check_placement(const Scenario& s, const PlacementConfig& placement);

// One continuous off-device data stream.
struct UploadStream {
    std::string label;      // sensor id or "<primitive>.signal"
    double bytes_per_second = 0.0;
    double packet_hz = 0.0;  // 0 for signals, which upload per graph completion
    std::string primitive;  // set for signals
};

// Bytes/s each primitive contributes to the uplink. Offloaded sensors shared
// by several primitives are attributed once, to the primitive with the
// highest demand.
std::map<std::string, double> effective_upload_bytes(const Scenario& s,
                                                     const PlacementConfig& placement);

// Streams that must leave the device under `placement`, after applying the
// scenario's upload settings.
std::vector<UploadStream> upload_plan(const Scenario& s, const PlacementConfig& placement);

double total_upload_bytes(const std::vector<UploadStream>& plan);

}  // namespace wearsim
