#pragma once
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "config.hpp"

namespace qrplsim {

// Config files are plain text: `key = value` lines, `[section]` headers,
// `#` comments. Unknown sections or keys are rejected with the line number.
// Omitted keys keep the Table-1 defaults.

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_double(const std::string& raw, const std::string& where) {
    try {
        std::size_t used = 0;
        double v = std::stod(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigInvalid(where + ": expected a number, got '" + raw + "'");
    }
}

inline std::int64_t parse_int(const std::string& raw, const std::string& where) {
    try {
        std::size_t used = 0;
        std::int64_t v = std::stoll(raw, &used, 0);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigInvalid(where + ": expected an integer, got '" + raw + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& raw, const std::string& where) {
    try {
        std::size_t used = 0;
        std::uint64_t v = std::stoull(raw, &used, 0);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigInvalid(where + ": expected an unsigned integer, got '" + raw + "'");
    }
}

inline bool parse_bool(const std::string& raw, const std::string& where) {
    if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return true;
    if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return false;
    throw ConfigInvalid(where + ": expected a boolean, got '" + raw + "'");
}

} // namespace detail

inline void apply_config_entry(SimConfig& cfg, const std::string& section,
                               const std::string& key, const std::string& value,
                               const std::string& where) {
    using namespace detail;
    const std::string full = section.empty() ? key : section + "." + key;
    using Setter = std::function<void()>;
    const std::map<std::string, Setter> setters = {
        {"node_count", [&] { cfg.node_count = static_cast<int>(parse_int(value, where)); }},
        {"area_width_m", [&] { cfg.area_width_m = parse_double(value, where); }},
        {"area_height_m", [&] { cfg.area_height_m = parse_double(value, where); }},
        {"traffic_ppm", [&] { cfg.traffic_ppm = parse_double(value, where); }},
        {"packet_bytes", [&] { cfg.packet_bytes = static_cast<int>(parse_int(value, where)); }},
        {"buffer_size", [&] { cfg.buffer_size = static_cast<int>(parse_int(value, where)); }},
        {"retransmission_limit",
         [&] { cfg.retransmission_limit = static_cast<int>(parse_int(value, where)); }},
        {"ewma_beta", [&] { cfg.ewma_beta = parse_double(value, where); }},
        {"slot_duration_s", [&] { cfg.slot_duration_s = parse_double(value, where); }},
        {"slots_per_slotframe",
         [&] { cfg.slots_per_slotframe = static_cast<int>(parse_int(value, where)); }},
        {"slotframes_total",
         [&] { cfg.slotframes_total = static_cast<int>(parse_int(value, where)); }},
        {"warmup_slotframes",
         [&] { cfg.warmup_slotframes = static_cast<int>(parse_int(value, where)); }},
        {"rng_seed", [&] { cfg.rng_seed = parse_u64(value, where); }},
        {"runs", [&] { cfg.runs = static_cast<int>(parse_int(value, where)); }},
        {"objective_function",
         [&] {
             if (value == "OF0") cfg.objective_function = ObjectiveFunction::OF0;
             else if (value == "MRHOF") cfg.objective_function = ObjectiveFunction::MRHOF;
             else if (value == "QRPL") cfg.objective_function = ObjectiveFunction::QRPL;
             else throw ConfigInvalid(where + ": objective_function must be OF0, MRHOF or QRPL");
         }},
        {"learning.alpha", [&] { cfg.learning.alpha = parse_double(value, where); }},
        {"learning.bf_th", [&] { cfg.learning.bf_th = parse_double(value, where); }},
        {"learning.theta", [&] { cfg.learning.theta = parse_double(value, where); }},
        {"trickle.i_min_s", [&] { cfg.trickle.i_min_s = parse_double(value, where); }},
        {"trickle.doublings",
         [&] { cfg.trickle.doublings = static_cast<int>(parse_int(value, where)); }},
        {"trickle.phi_0", [&] { cfg.trickle.phi_0 = static_cast<int>(parse_int(value, where)); }},
        {"trickle.phi_init",
         [&] { cfg.trickle.phi_init = static_cast<int>(parse_int(value, where)); }},
        {"trickle.window_x_s", [&] { cfg.trickle.window_x_s = parse_double(value, where); }},
        {"trickle.reset_on_parent_change",
         [&] {
             if (value == "auto") cfg.trickle.reset_on_parent_change = ParentChangeReset::Auto;
             else if (value == "on") cfg.trickle.reset_on_parent_change = ParentChangeReset::On;
             else if (value == "off") cfg.trickle.reset_on_parent_change = ParentChangeReset::Off;
             else throw ConfigInvalid(where + ": reset_on_parent_change must be auto, on or off");
         }},
        {"channel.tx_power_dbm", [&] { cfg.channel.tx_power_dbm = parse_double(value, where); }},
        {"channel.pathloss_ref_db",
         [&] { cfg.channel.pathloss_ref_db = parse_double(value, where); }},
        {"channel.pathloss_exponent",
         [&] { cfg.channel.pathloss_exponent = parse_double(value, where); }},
        {"channel.shadowing_sigma_db",
         [&] { cfg.channel.shadowing_sigma_db = parse_double(value, where); }},
        {"channel.rx_sensitivity_dbm",
         [&] { cfg.channel.rx_sensitivity_dbm = parse_double(value, where); }},
        {"channel.interference_range_factor",
         [&] { cfg.channel.interference_range_factor = parse_double(value, where); }},
        {"channel.shadowing_mode",
         [&] {
             if (value == "per_packet") cfg.channel.shadowing_mode = ShadowingMode::PerPacket;
             else if (value == "static_per_link")
                 cfg.channel.shadowing_mode = ShadowingMode::StaticPerLink;
             else throw ConfigInvalid(where +
                                      ": shadowing_mode must be per_packet or static_per_link");
         }},
        {"mac.backoff_min_slots",
         [&] { cfg.mac.backoff_min_slots = static_cast<int>(parse_int(value, where)); }},
        {"mac.backoff_max_slots",
         [&] { cfg.mac.backoff_max_slots = static_cast<int>(parse_int(value, where)); }},
        {"mac.cca_enabled", [&] { cfg.mac.cca_enabled = parse_bool(value, where); }},
        {"rpl.eta", [&] { cfg.rpl.eta = static_cast<int>(parse_int(value, where)); }},
        {"rpl.etx_window",
         [&] { cfg.rpl.etx_window = static_cast<int>(parse_int(value, where)); }},
        {"rpl.etx_unknown", [&] { cfg.rpl.etx_unknown = parse_double(value, where); }},
        {"rpl.mrhof_hysteresis", [&] { cfg.rpl.mrhof_hysteresis = parse_double(value, where); }},
        {"rpl.mrhof_rank_unit", [&] { cfg.rpl.mrhof_rank_unit = parse_double(value, where); }},
    };
    auto it = setters.find(full);
    if (it == setters.end())
        throw ConfigInvalid(where + ": unknown key '" + full + "'");
    it->second();
}

inline SimConfig parse_config_text(std::istream& in, const std::string& source_name) {
    SimConfig cfg;
    std::string line;
    std::string section;
    int line_no = 0;
    static const std::map<std::string, bool> known_sections = {
        {"", true},       {"learning", true}, {"trickle", true},
        {"channel", true}, {"mac", true},      {"rpl", true},
    };
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = source_name + ":" + std::to_string(line_no);
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string text = detail::trim(line);
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']')
                throw ConfigInvalid(where + ": malformed section header '" + text + "'");
            section = detail::trim(text.substr(1, text.size() - 2));
            if (!known_sections.count(section))
                throw ConfigInvalid(where + ": unknown section '" + section + "'");
            continue;
        }
        auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigInvalid(where + ": expected 'key = value', got '" + text + "'");
        const std::string key = detail::trim(text.substr(0, eq));
        const std::string value = detail::trim(text.substr(eq + 1));
        if (key.empty()) throw ConfigInvalid(where + ": empty key");
        apply_config_entry(cfg, section, key, value, where);
    }
    cfg.validate();
    return cfg;
}

inline SimConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open config file '" + path + "'");
    return parse_config_text(in, path);
}

// Applies a single `key=value` (or `section.key=value`) override on top of a
// parsed config. Used by the CLI --override flag.
inline void apply_override(SimConfig& cfg, const std::string& expr) {
    auto eq = expr.find('=');
    if (eq == std::string::npos)
        throw ConfigInvalid("override '" + expr + "' is not of the form key=value");
    std::string key = detail::trim(expr.substr(0, eq));
    const std::string value = detail::trim(expr.substr(eq + 1));
    std::string section;
    auto dot = key.find('.');
    if (dot != std::string::npos) {
        section = key.substr(0, dot);
        key = key.substr(dot + 1);
    }
    apply_config_entry(cfg, section, key, value, "override '" + expr + "'");
}

} // namespace qrplsim
