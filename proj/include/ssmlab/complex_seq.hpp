#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ssmlab {

using cplx = std::complex<double>;

// Length-L ordered complex values. Serves both as a time-domain signal and as
// a spectrum; real signals are stored with zero imaginary parts.
class ComplexSequence {
public:
    explicit ComplexSequence(std::vector<cplx> values) : values_(std::move(values)) {
        if (values_.empty())
            throw std::invalid_argument("ComplexSequence: length must be >= 1");
        for (const cplx& v : values_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw std::invalid_argument("ComplexSequence: non-finite value");
    }

    ComplexSequence(std::initializer_list<cplx> values)
        : ComplexSequence(std::vector<cplx>(values)) {}

    static ComplexSequence zeros(std::size_t n) {
        return ComplexSequence(std::vector<cplx>(n, cplx{0.0, 0.0}));
    }

    static ComplexSequence from_real(const std::vector<double>& x) {
        std::vector<cplx> v(x.begin(), x.end());
        return ComplexSequence(std::move(v));
    }

    std::size_t size() const { return values_.size(); }
    const cplx& operator[](std::size_t i) const { return values_[i]; }
    const std::vector<cplx>& values() const { return values_; }

    auto begin() const { return values_.begin(); }
    auto end() const { return values_.end(); }

private:
    std::vector<cplx> values_;
};

inline void require_same_length(const ComplexSequence& a, const ComplexSequence& b,
                                const char* where) {
    if (a.size() != b.size())
        throw std::invalid_argument(std::string(where) + ": length mismatch");
}

} // namespace ssmlab
