#pragma once

// Structured event log for simulation runs. Every event is a flat JSON
// object with a block number and a kind; amounts are serialized as
// fixed-point decimal strings so that two runs with the same seed produce
// byte-identical output.

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "interpool/amount.hpp"
#include "interpool/hash.hpp"

namespace interpool {

using json = nlohmann::ordered_json;

struct Event {
    uint64_t block = 0;
    std::string kind;
    json fields;  // kind-specific payload, insertion-ordered
};

class EventLog {
  public:
    void emit(uint64_t block, std::string kind, json fields = json::object()) {
        events_.push_back(Event{block, std::move(kind), std::move(fields)});
    }

    const std::vector<Event>& events() const { return events_; }
    size_t size() const { return events_.size(); }

    size_t count(const std::string& kind) const {
        size_t n = 0;
        for (const auto& e : events_)
            if (e.kind == kind) ++n;
        return n;
    }

    std::vector<const Event*> of_kind(const std::string& kind) const {
        std::vector<const Event*> out;
        for (const auto& e : events_)
            if (e.kind == kind) out.push_back(&e);
        return out;
    }

    // One compact JSON object per line, in emission order.
    std::string to_jsonl() const {
        std::ostringstream os;
        for (const auto& e : events_) {
            json line = json::object();
            line["block"] = e.block;
            line["kind"] = e.kind;
            // The envelope keys stay authoritative over payload fields.
            for (const auto& [k, v] : e.fields.items())
                if (k != "block" && k != "kind") line[k] = v;
            os << line.dump() << '\n';
        }
        return os.str();
    }

  private:
    std::vector<Event> events_;
};

// JSON helpers: amounts and ratios go out as exact decimal strings, hashes
// as lowercase hex.
template <Unit U>
inline std::string jstr(Amount<U> a) {
    return a.to_string();
}
inline std::string jstr(Ratio r) { return r.to_string(); }
inline std::string jstr(const Hash256& h) { return h.hex(); }

}  // namespace interpool
