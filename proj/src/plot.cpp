#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "memcap/experiment.hpp"

namespace memcap {
namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

}  // namespace

void write_plot_svg(std::ostream& out, const SweepResult& result) {
  if (result.rows.empty()) throw std::invalid_argument("emit_plot: sweep result has an empty grid");
  const double n = result.config.n;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double y_max = n * 1.05;
  auto y_of = [&](double v) { return kTop + plot_h * (1.0 - std::clamp(v, 0.0, y_max) / y_max); };

  const auto slots = static_cast<double>(result.rows.size());
  const double slot_w = plot_w / slots;
  const double bar_w = slot_w * 0.7;

  fmt::print(out,
             "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
             "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n",
             kWidth, kHeight);
  fmt::print(out, "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth, kHeight);
  fmt::print(out, "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">total memory capacity, "
                  "{} / {}, N = {}</text>\n",
             kWidth / 2, to_string(result.config.activation), to_string(result.config.ensemble),
             result.config.n);

  // Axes.
  fmt::print(out, "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", kLeft, kTop,
             kTop + plot_h);
  fmt::print(out, "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", kLeft,
             kTop + plot_h, kLeft + plot_w);
  const int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    const double v = n * i / ticks;
    fmt::print(out, "<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", kLeft - 6,
               y_of(v) + 4, v);
  }
  fmt::print(out, "<text x=\"18\" y=\"{:.1f}\" transform=\"rotate(-90 18 {:.1f})\" "
                  "text-anchor=\"middle\">mean MC</text>\n",
             kTop + plot_h / 2, kTop + plot_h / 2);
  fmt::print(out, "<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">log10(sigma)</text>\n",
             kLeft + plot_w / 2, kHeight - 12);

  for (std::size_t k = 0; k < result.rows.size(); ++k) {
    const SigmaRow& row = result.rows[k];
    const double x = kLeft + slot_w * k + (slot_w - bar_w) / 2;
    if (std::isfinite(row.mc_mean)) {
      const double top = y_of(row.mc_mean);
      fmt::print(out,
                 "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
                 "fill=\"#4c72b0\"/>\n",
                 x, top, bar_w, kTop + plot_h - top);
      if (std::isfinite(row.mc_sd) && row.mc_sd > 0.0) {
        const double cx = x + bar_w / 2;
        fmt::print(out,
                   "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" "
                   "stroke=\"black\"/>\n",
                   cx, y_of(row.mc_mean - row.mc_sd), y_of(row.mc_mean + row.mc_sd));
      }
    }
    fmt::print(out, "<text x=\"{:.2f}\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"10\">{:.2f}</text>\n",
               x + bar_w / 2, kTop + plot_h + 16, std::log10(row.sigma));
  }

  // Reference lines at the upper (N) and lower (1) capacity bounds.
  for (const double level : {n, 1.0}) {
    fmt::print(out,
               "<line x1=\"{0}\" y1=\"{1:.2f}\" x2=\"{2}\" y2=\"{1:.2f}\" stroke=\"#c44e52\" "
               "stroke-dasharray=\"6,4\"/>\n",
               kLeft, y_of(level), kLeft + plot_w);
  }
  out << "</svg>\n";
}

}  // namespace memcap
