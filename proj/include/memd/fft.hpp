#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

namespace memd::fft
{

namespace detail
{

// FFTW planning is not thread-safe; execution with fresh plans is.
inline std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

class Plan
{
public:
    explicit Plan(fftw_plan p) : plan_(p) {}
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    ~Plan()
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    void execute() const { fftw_execute(plan_); }

private:
    fftw_plan plan_;
};

} // namespace detail

/// Non-negative-frequency half of the DFT of a real sequence: bins 0..T/2,
/// unnormalized.
inline std::vector<std::complex<double>> forward_real(std::span<const double> x)
{
    const int n = static_cast<int>(x.size());
    std::vector<double> in(x.begin(), x.end());
    std::vector<std::complex<double>> out(x.size() / 2 + 1);
    fftw_plan raw;
    {
        std::lock_guard lock(detail::planner_mutex());
        raw = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
    }
    detail::Plan plan(raw);
    plan.execute();
    return out;
}

/// Inverse DFT of a full complex spectrum, normalized by 1/T.
inline std::vector<std::complex<double>> inverse(std::vector<std::complex<double>> spectrum)
{
    const int n = static_cast<int>(spectrum.size());
    std::vector<std::complex<double>> out(spectrum.size());
    fftw_plan raw;
    {
        std::lock_guard lock(detail::planner_mutex());
        raw = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(spectrum.data()),
                               reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    detail::Plan plan(raw);
    plan.execute();
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& v : out)
        v *= inv;
    return out;
}

} // namespace memd::fft
