#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace mixc {

inline constexpr int kNumClasses = 4;

// Class order is fixed everywhere: Pre/Post, NoCollapse, Transitional, Collapse.
enum class SprayClass : int { PrePost = 0, NoCollapse = 1, Transitional = 2, Collapse = 3 };

// Stable machine ids ("pre_post", ...) used in manifests and file names.
const char* class_id(SprayClass c);
// Human-readable names ("Pre/Post", "No collapse", ...) used in report text.
const char* class_display_name(SprayClass c);
SprayClass class_from_id(const std::string& id);

// H x W x C grid of intensities in [0,1], row-major HWC. channels is 1 or 3;
// the 3-channel form is the grayscale triplication (all channels equal until
// a channel-specific overlay is applied).
struct ImageTensor {
    int height = 0;
    int width = 0;
    int channels = 1;
    std::vector<double> values;

    ImageTensor() = default;
    ImageTensor(int h, int w, int c);

    double& at(int y, int x, int c) { return values[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
    double at(int y, int x, int c) const { return values[(static_cast<std::size_t>(y) * width + x) * channels + c]; }

    std::size_t numel() const { return values.size(); }
    void clamp01();
    bool in_unit_range() const;
    double max_value() const;
};

// Probability vector over the 4 classes. Entries are non-negative and sum to
// 1 within 1e-9; produced either as a one-hot label or by mixup interpolation.
struct SoftLabel {
    std::array<double, kNumClasses> probs{};

    static SoftLabel one_hot(SprayClass c);
    bool valid(double tol = 1e-9) const;
    void check_valid() const;  // throws on invariant violation
    // Argmax with ties broken toward the first-listed class.
    SprayClass hard() const;
};

struct Sample {
    ImageTensor image;
    SoftLabel label;
};

}  // namespace mixc
