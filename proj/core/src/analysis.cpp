#include "hades/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "hades/dft.hpp"
#include "hades/svd.hpp"
#include "hades/tensor.hpp"

namespace hades {

SpectralReport output_spectrum(const std::vector<double>& y, std::size_t T,
                               std::size_t P) {
    if (T < 2) throw std::invalid_argument("output_spectrum: T < 2");
    if (y.size() != T * P || P == 0)
        throw std::invalid_argument("output_spectrum: shape mismatch");
    SpectralReport rep;
    rep.magnitude.assign(T, 0.0);
    std::vector<double> chan(T);
    for (std::size_t p = 0; p < P; ++p) {
        for (std::size_t t = 0; t < T; ++t) chan[t] = y[t * P + p];
        ComplexVector X = dft(chan);
        for (std::size_t k = 0; k < T; ++k) rep.magnitude[k] += X.magnitude(k);
    }
    for (double& v : rep.magnitude) v /= static_cast<double>(P);
    const double mx = *std::max_element(rep.magnitude.begin(), rep.magnitude.end());
    if (mx == 0.0) {
        rep.degenerate = true;
        return rep;
    }
    for (double& v : rep.magnitude) v /= mx;
    return rep;
}

std::vector<double> frequency_response(const FilterMatrix& fm, std::size_t cap) {
    const std::size_t T = fm.T;
    if (T == 0) throw std::invalid_argument("frequency_response: empty matrix");
    if (T > cap) throw std::invalid_argument("frequency_response: T exceeds cap");
    if (fm.entries.size() != T * T)
        throw std::invalid_argument("frequency_response: shape mismatch");

    // A = M . F^H (unitary F: F[j][k] = exp(-2*pi*i*j*k/T) / sqrt(T)), so
    // F^H[s][k] = exp(+2*pi*i*s*k/T) / sqrt(T). Then Lambda = F . A.
    const double invs = 1.0 / std::sqrt(static_cast<double>(T));
    const double w = 2.0 * M_PI / static_cast<double>(T);
    std::vector<double> Are(T * T, 0.0), Aim(T * T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t k = 0; k < T; ++k) {
            double re = 0.0, im = 0.0;
            for (std::size_t s = 0; s < T; ++s) {
                const double m = fm.entries[t * T + s];
                if (m == 0.0) continue;
                const double ang = w * static_cast<double>((s * k) % T);
                re += m * std::cos(ang);
                im += m * std::sin(ang);
            }
            Are[t * T + k] = re * invs;
            Aim[t * T + k] = im * invs;
        }
    }
    std::vector<double> curve(T, 0.0);
    for (std::size_t i = 0; i < T; ++i) {
        double rownorm = 0.0;
        for (std::size_t k = 0; k < T; ++k) {
            double re = 0.0, im = 0.0;
            for (std::size_t t = 0; t < T; ++t) {
                const double ang = w * static_cast<double>((i * t) % T);
                const double c = std::cos(ang), s = -std::sin(ang);
                // (c + i s) * (Are + i Aim)
                re += c * Are[t * T + k] - s * Aim[t * T + k];
                im += c * Aim[t * T + k] + s * Are[t * T + k];
            }
            re *= invs;
            im *= invs;
            rownorm += re * re + im * im;
        }
        curve[i] = std::sqrt(rownorm);
    }
    double nrm = 0.0;
    for (double v : curve) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (nrm > 0.0)
        for (double& v : curve) v /= nrm;
    return curve;
}

double effective_rank(const std::vector<double>& a, std::size_t rows,
                      std::size_t cols) {
    std::vector<double> sv = singular_values(a, rows, cols);
    double sum = 0.0;
    for (double s : sv) sum += s;
    if (sum == 0.0) throw std::invalid_argument("effective_rank: zero matrix");
    double ent = 0.0;
    for (double s : sv) {
        if (s <= 0.0) continue;
        const double p = s / sum;
        ent -= p * std::log(p);
    }
    return std::exp(ent);
}

double linear_cka(const std::vector<double>& X, std::size_t n, std::size_t d1,
                  const std::vector<double>& Y, std::size_t d2,
                  bool* degenerate) {
    if (n < 2 || X.size() != n * d1 || Y.size() != n * d2)
        throw std::invalid_argument("linear_cka: shape mismatch");
    if (degenerate) *degenerate = false;
    std::vector<double> Xc(X), Yc(Y);
    auto center = [n](std::vector<double>& A, std::size_t d) {
        for (std::size_t j = 0; j < d; ++j) {
            double mu = 0.0;
            for (std::size_t i = 0; i < n; ++i) mu += A[i * d + j];
            mu /= static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) A[i * d + j] -= mu;
        }
    };
    center(Xc, d1);
    center(Yc, d2);
    auto cross_fro2 = [n](const std::vector<double>& A, std::size_t da,
                          const std::vector<double>& B, std::size_t db) {
        double out = 0.0;
        for (std::size_t a = 0; a < da; ++a) {
            for (std::size_t b = 0; b < db; ++b) {
                double v = 0.0;
                for (std::size_t i = 0; i < n; ++i) v += A[i * da + a] * B[i * db + b];
                out += v * v;
            }
        }
        return out;
    };
    const double num = cross_fro2(Xc, d1, Yc, d2);
    const double dx = cross_fro2(Xc, d1, Xc, d1);
    const double dy = cross_fro2(Yc, d2, Yc, d2);
    const double denom = std::sqrt(dx) * std::sqrt(dy);
    if (denom == 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return num / denom;
}

void Histogram::add(double v) {
    const std::size_t B = counts.size();
    std::size_t bin;
    if (v < edges.front()) {
        bin = 0;
    } else if (v >= edges.back()) {
        bin = B - 1;
    } else {
        bin = static_cast<std::size_t>(
                  std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()) -
              1;
        if (bin >= B) bin = B - 1;
    }
    counts[bin] += 1;
    total += 1;
}

Histogram make_histogram(double lo, double hi, std::size_t bins) {
    if (!(hi > lo) || bins == 0) throw std::invalid_argument("make_histogram: bad range");
    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i)
        h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    h.counts.assign(bins, 0);
    return h;
}

Histogram delta_shift_histogram(const Model& m,
                                const std::vector<std::uint32_t>& ids,
                                Histogram hist) {
    const auto& c = m.cfg;
    const std::size_t Q = c.selected(), Hh = c.H;
    const double gamma_eff = (c.mode == RouterMode::kNoBias) ? 0.0 : c.gamma;
    ModelTape tape;
    model_forward(m, ids, nullptr, &tape);
    for (const auto& bt : tape.blocks) {
        for (std::size_t t = 0; t < bt.T; ++t) {
            for (std::size_t h = 0; h < Q; ++h) {
                const double pre = bt.slot_pre[t * Hh + h];
                const double bias = gamma_eff * bt.bias_raw[t * Q + h];
                hist.add(softplus(pre) - softplus(pre - bias));
            }
        }
    }
    return hist;
}

void write_barcode_csv(const std::vector<SelectionRecord>& records,
                       std::size_t E, const std::vector<std::string>& labels,
                       const std::string& path, const std::string& header_note) {
    if (!labels.empty() && labels.size() != records.size())
        throw std::invalid_argument("write_barcode_csv: label/token length mismatch");
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "# " << header_note << "\n";
    f << "token_index,region";
    for (std::size_t e = 0; e < E; ++e) f << ",expert" << e;
    f << "\n";
    for (std::size_t t = 0; t < records.size(); ++t) {
        std::vector<int> row(E, 0);
        for (std::size_t id : records[t].expert_ids) {
            if (id >= E) throw std::invalid_argument("write_barcode_csv: expert id out of range");
            row[id] = 1;
        }
        f << records[t].token_index << ',' << (labels.empty() ? "" : labels[t]);
        for (std::size_t e = 0; e < E; ++e) f << ',' << row[e];
        f << "\n";
    }
}

void write_spectrum_csv(const SpectralReport& rep, const std::string& path,
                        const std::string& header_note) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "# " << header_note << " normalization=" << rep.normalization
      << (rep.degenerate ? " degenerate=1" : "") << "\n";
    f << "bin,magnitude\n";
    // one-sided view in exports; the full two-sided report stays in memory
    const std::size_t half = rep.magnitude.size() / 2;
    for (std::size_t k = 0; k <= half && k < rep.magnitude.size(); ++k)
        f << k << ',' << rep.magnitude[k] << "\n";
}

void write_curve_csv(const std::vector<double>& curve, const std::string& column,
                     const std::string& path, const std::string& header_note) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "# " << header_note << "\n";
    f << "index," << column << "\n";
    for (std::size_t i = 0; i < curve.size(); ++i) f << i << ',' << curve[i] << "\n";
}

void write_histogram_csv(const Histogram& h, const std::string& path,
                         const std::string& header_note) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "# " << header_note << "\n";
    f << "bin_lo,bin_hi,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        f << h.edges[i] << ',' << h.edges[i + 1] << ',' << h.counts[i] << "\n";
}

}  // namespace hades
