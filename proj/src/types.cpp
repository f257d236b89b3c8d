#include "qfr/types.hpp"

namespace qfr {

Dataset::Dataset(Matrix inputs, std::vector<double> outputs, std::vector<std::string> labels)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)), labels_(std::move(labels)) {
    const std::size_t n = outputs_.size();
    if (n < 1) throw DomainError("dataset needs at least one observation");
    if (inputs_.cols() < 1) throw DomainError("dataset needs at least one input dimension");
    if (inputs_.rows() != n)
        throw DimensionError("inputs rows (" + std::to_string(inputs_.rows()) +
                             ") do not match outputs length (" + std::to_string(n) + ")");
    if (!labels_.empty() && labels_.size() != n)
        throw DimensionError("labels length does not match observation count");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(outputs_[i]))
            throw DomainError("non-finite output at row " + std::to_string(i + 1));
        for (std::size_t j = 0; j < inputs_.cols(); ++j) {
            const double v = inputs_(i, j);
            if (!std::isfinite(v) || v < 0.0)
                throw DomainError("input must be finite and >= 0 at row " +
                                  std::to_string(i + 1) + ", column " + std::to_string(j + 1));
        }
    }
}

bool Dataset::dominates(std::size_t i, std::size_t h) const {
    for (std::size_t j = 0; j < d(); ++j)
        if (inputs_(i, j) > inputs_(h, j)) return false;
    return true;
}

const char* method_name(Method m) {
    switch (m) {
        case Method::CQR: return "cqr";
        case Method::CER: return "cer";
        case Method::ICQR: return "icqr";
        case Method::ICER: return "icer";
        case Method::OrderAlpha: return "order-alpha";
        case Method::ConvexifiedOrderAlpha: return "coa";
        case Method::FDH: return "fdh";
    }
    return "?";
}

bool is_regression_method(Method m) {
    return m == Method::CQR || m == Method::CER || m == Method::ICQR || m == Method::ICER;
}

bool DominanceMatrix::is_reflexive() const {
    for (std::size_t i = 0; i < n_; ++i)
        if (!at(i, i)) return false;
    return true;
}

bool DominanceMatrix::is_transitive() const {
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t h = 0; h < n_; ++h) {
            if (!at(i, h)) continue;
            for (std::size_t k = 0; k < n_; ++k)
                if (at(h, k) && !at(i, k)) return false;
        }
    return true;
}

} // namespace qfr
