#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nfp/tensor.hpp"

namespace nfp {

enum class ParamRole { kWeight, kBias };

// One contiguous slice of the flat parameter vector.
struct ParamSlot {
    int layer = 0;  // 1-based, matching W_1..W_L / b_1..b_L
    ParamRole role = ParamRole::kWeight;
    std::int64_t offset = 0;
    std::int64_t rows = 0;  // bias: rows == 1
    std::int64_t cols = 0;

    std::int64_t numel() const { return rows * cols; }
};

// Slot order is W_1, b_1, W_2, b_2, ... Offsets are contiguous and cover [0, P).
struct ParamLayout {
    std::vector<ParamSlot> slots;

    std::int64_t total() const {
        return slots.empty() ? 0 : slots.back().offset + slots.back().numel();
    }

    int n_layers() const { return slots.empty() ? 0 : slots.back().layer; }

    void validate() const {
        std::int64_t expect = 0;
        for (const auto& s : slots) {
            if (s.offset != expect)
                throw ConfigError("param layout gap at layer " + std::to_string(s.layer));
            expect += s.numel();
        }
    }
};

// Flat parameter vector theta plus the layout that carves it into per-layer
// weight/bias views. Views are spans into the flat storage, so
// flat -> views -> flat is the identity by construction.
class ParamVector {
public:
    ParamVector() = default;

    ParamVector(ParamLayout layout, Tensor flat)
        : layout_(std::move(layout)), flat_(std::move(flat)) {
        layout_.validate();
        if (flat_.numel() != layout_.total())
            throw ConfigError("param vector length " + std::to_string(flat_.numel()) +
                              " does not match layout total " + std::to_string(layout_.total()));
    }

    explicit ParamVector(ParamLayout layout) : layout_(std::move(layout)) {
        layout_.validate();
        flat_ = Tensor({layout_.total()});
    }

    const ParamLayout& layout() const { return layout_; }
    const Tensor& flat() const { return flat_; }
    Tensor& flat() { return flat_; }
    std::int64_t size() const { return flat_.numel(); }

    std::span<const double> view(const ParamSlot& s) const {
        return flat_.flat().subspan(static_cast<std::size_t>(s.offset),
                                    static_cast<std::size_t>(s.numel()));
    }
    std::span<double> view(const ParamSlot& s) {
        return flat_.flat().subspan(static_cast<std::size_t>(s.offset),
                                    static_cast<std::size_t>(s.numel()));
    }

private:
    ParamLayout layout_;
    Tensor flat_;
};

}  // namespace nfp
