#include "diqkd/types.hpp"

#include <sstream>

namespace diqkd {

std::string to_string(Architecture arch) {
    switch (arch) {
        case Architecture::esr: return "esr";
        case Architecture::pqa: return "pqa";
        case Architecture::two_esr: return "two_esr";
        case Architecture::unassisted: return "unassisted";
    }
    return "unknown";
}

Architecture architecture_from_string(const std::string& name) {
    if (name == "esr") return Architecture::esr;
    if (name == "pqa") return Architecture::pqa;
    if (name == "two_esr") return Architecture::two_esr;
    if (name == "unassisted") return Architecture::unassisted;
    throw std::invalid_argument("unsupported architecture tag '" + name + "'");
}

int detector_count(Architecture arch) {
    switch (arch) {
        case Architecture::unassisted: return 4;
        case Architecture::esr:
        case Architecture::pqa: return 8;
        case Architecture::two_esr: return 12;
    }
    return 0;
}

int conditioning_size(Architecture arch) {
    switch (arch) {
        case Architecture::unassisted: return 1;
        case Architecture::esr: return 2;
        case Architecture::pqa:
        case Architecture::two_esr: return 3;
    }
    return 0;
}

ClickPattern::ClickPattern(const std::vector<int>& values) {
    if (values.size() > kMaxSize) throw std::invalid_argument("ClickPattern: too many counters");
    size = static_cast<std::uint8_t>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < 0 || values[i] > 255) {
            throw std::invalid_argument("ClickPattern: count out of range");
        }
        counts[i] = static_cast<std::uint8_t>(values[i]);
    }
}

int ClickPattern::total() const {
    int s = 0;
    for (int i = 0; i < size; ++i) s += counts[i];
    return s;
}

std::vector<int> ClickPattern::to_vector() const {
    return std::vector<int>(counts.begin(), counts.begin() + size);
}

std::string ClickPattern::to_string() const {
    std::ostringstream os;
    os << '(';
    for (int i = 0; i < size; ++i) os << (i ? "," : "") << int(counts[i]);
    os << ')';
    return os.str();
}

double CondDistribution::total() const {
    double s = 0.0, c = 0.0;
    for (const auto& [pattern, p] : entries) {
        double y = p - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

double CondDistribution::probability(const ClickPattern& p) const {
    auto it = entries.find(p);
    return it == entries.end() ? 0.0 : it->second;
}

double BinaryOutcomeDistribution::probability(int a_alice, int a_bob,
                                              const std::vector<int>& herald) const {
    auto it = entries.find(OutcomeKey{a_alice, a_bob, herald});
    return it == entries.end() ? 0.0 : it->second;
}

double BinaryOutcomeDistribution::herald_probability(const std::vector<int>& herald) const {
    double s = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) s += probability(a, b, herald);
    return s;
}

}  // namespace diqkd
