#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>

namespace qrplsim {

using node_id = std::uint16_t;
using slot_t = std::int64_t;

inline constexpr node_id kRootId = 0;
inline constexpr node_id kNoNode = 0xFFFF;

// A data packet travelling toward the DODAG root. gen_slot is the arrival
// slot at the source; counted marks packets generated after the warm-up
// window (only those enter the metrics).
struct Packet {
    std::uint64_t id = 0;
    node_id src = kNoNode;
    slot_t gen_slot = 0;
    bool counted = false;
};

struct ConfigInvalid : std::runtime_error {
    explicit ConfigInvalid(const std::string& what) : std::runtime_error(what) {}
};

struct SchedulingInPast : std::logic_error {
    explicit SchedulingInPast(const std::string& what) : std::logic_error(what) {}
};

struct PlacementFailed : std::runtime_error {
    explicit PlacementFailed(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidDistance : std::invalid_argument {
    explicit InvalidDistance(const std::string& what) : std::invalid_argument(what) {}
};

struct UnknownLink : std::invalid_argument {
    explicit UnknownLink(const std::string& what) : std::invalid_argument(what) {}
};

struct HopOverflow : std::domain_error {
    explicit HopOverflow(const std::string& what) : std::domain_error(what) {}
};

struct MalformedRank : std::domain_error {
    explicit MalformedRank(const std::string& what) : std::domain_error(what) {}
};

struct NoViableParent : std::runtime_error {
    explicit NoViableParent(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyQueue : std::logic_error {
    explicit EmptyQueue(const std::string& what) : std::logic_error(what) {}
};

struct NoDeliveries : std::runtime_error {
    explicit NoDeliveries(const std::string& what) : std::runtime_error(what) {}
};

struct IoFailure : std::runtime_error {
    explicit IoFailure(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qrplsim
