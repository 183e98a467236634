#include "mixclass/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mixc {

const char* class_id(SprayClass c) {
    switch (c) {
        case SprayClass::PrePost: return "pre_post";
        case SprayClass::NoCollapse: return "no_collapse";
        case SprayClass::Transitional: return "transitional";
        case SprayClass::Collapse: return "collapse";
    }
    throw std::invalid_argument("class_id: bad class");
}

const char* class_display_name(SprayClass c) {
    switch (c) {
        case SprayClass::PrePost: return "Pre/Post";
        case SprayClass::NoCollapse: return "No collapse";
        case SprayClass::Transitional: return "Transitional";
        case SprayClass::Collapse: return "Collapse";
    }
    throw std::invalid_argument("class_display_name: bad class");
}

SprayClass class_from_id(const std::string& id) {
    for (int k = 0; k < kNumClasses; ++k) {
        if (id == class_id(static_cast<SprayClass>(k))) return static_cast<SprayClass>(k);
    }
    throw std::invalid_argument("class_from_id: unknown class id '" + id + "'");
}

ImageTensor::ImageTensor(int h, int w, int c) : height(h), width(w), channels(c) {
    if (h <= 0 || w <= 0 || (c != 1 && c != 3)) {
        throw std::invalid_argument("ImageTensor: bad dimensions");
    }
    values.assign(static_cast<std::size_t>(h) * w * c, 0.0);
}

void ImageTensor::clamp01() {
    for (double& v : values) v = std::clamp(v, 0.0, 1.0);
}

bool ImageTensor::in_unit_range() const {
    return std::all_of(values.begin(), values.end(),
                       [](double v) { return v >= 0.0 && v <= 1.0; });
}

double ImageTensor::max_value() const {
    return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

SoftLabel SoftLabel::one_hot(SprayClass c) {
    SoftLabel l;
    l.probs[static_cast<int>(c)] = 1.0;
    return l;
}

bool SoftLabel::valid(double tol) const {
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0)) return false;
        sum += p;
    }
    return std::abs(sum - 1.0) <= tol;
}

void SoftLabel::check_valid() const {
    if (!valid()) throw std::invalid_argument("SoftLabel: entries must lie in [0,1] and sum to 1");
}

SprayClass SoftLabel::hard() const {
    int best = 0;
    for (int k = 1; k < kNumClasses; ++k) {
        if (probs[k] > probs[best]) best = k;
    }
    return static_cast<SprayClass>(best);
}

}  // namespace mixc
