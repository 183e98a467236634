#include "canonical_json.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace mixc {

namespace {

void emit(const nlohmann::json& j, std::string& out) {
    using value_t = nlohmann::json::value_t;
    switch (j.type()) {
        case value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {  // std::map order: key-sorted
                if (!first) out += ',';
                first = false;
                out += nlohmann::json(it.key()).dump();
                out += ':';
                emit(it.value(), out);
            }
            out += '}';
            break;
        }
        case value_t::array: {
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ',';
                emit(j[i], out);
            }
            out += ']';
            break;
        }
        case value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) throw std::invalid_argument("canonical_dump: non-finite number");
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out += buf;
            break;
        }
        default:
            out += j.dump();  // string/int/bool/null have one canonical form
            break;
    }
}

}  // namespace

std::string canonical_dump(const nlohmann::json& j) {
    std::string out;
    emit(j, out);
    return out;
}

}  // namespace mixc
