#include "defmag/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "defmag/error.hpp"
#include "defmag/expression.hpp"

namespace defmag {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace

std::string format_fixed(double value) {
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

void write_confusion_csv(std::ostream& out, const CvResult& cv) {
  out << "true\\pred";
  for (auto e : kAllExpressions) out << ',' << to_string(e);
  out << '\n';
  for (Eigen::Index r = 0; r < cv.percent.rows(); ++r) {
    out << to_string(static_cast<Expression>(r));
    for (Eigen::Index c = 0; c < cv.percent.cols(); ++c) out << ',' << format_fixed(cv.percent(r, c));
    out << '\n';
  }
}

void write_accuracy_line(std::ostream& out, const CvResult& cv) {
  out << "accuracy," << format_fixed(cv.mean_accuracy) << ',' << format_fixed(cv.std_accuracy) << '\n';
}

void write_summary_csv(std::ostream& out, std::span<const ConditionResult> results) {
  out << "condition,accuracy,std\n";
  for (const auto& r : results) {
    out << r.name << ',' << format_fixed(r.cv.mean_accuracy) << ',' << format_fixed(r.cv.std_accuracy)
        << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const Dataset& dataset,
                          const std::vector<SequenceFeatures>& data) {
  out << "sequence,label,frame,min,mean,max\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto label = to_string(static_cast<Expression>(dataset.labels[i]));
    for (std::size_t t = 0; t < data[i].trajectory.size(); ++t) {
      const auto& s = data[i].trajectory[t];
      out << dataset.names[i] << ',' << label << ',' << t << ',' << format_fixed(s.min) << ','
          << format_fixed(s.mean) << ',' << format_fixed(s.max) << '\n';
    }
  }
}

void write_predictions_csv(std::ostream& out, const Dataset& dataset, const CvResult& cv) {
  out << "sequence,label,subject,fold,predicted\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out << dataset.names[i] << ',' << to_string(static_cast<Expression>(dataset.labels[i])) << ','
        << dataset.subjects[i] << ',' << cv.folds[i] << ','
        << to_string(static_cast<Expression>(cv.predictions[i])) << '\n';
  }
}

void export_report(const std::filesystem::path& dir, const RunReport& report) {
  std::filesystem::create_directories(dir);
  for (const auto& c : report.conditions) {
    auto conf = open_out(dir / ("confusion_" + c.name + ".csv"));
    write_confusion_csv(conf, c.cv);
    auto pred = open_out(dir / ("predictions_" + c.name + ".csv"));
    write_predictions_csv(pred, report.dataset, c.cv);
    auto traj = open_out(dir / ("trajectory_" + c.name + ".csv"));
    write_trajectory_csv(traj, report.dataset, c.magnified ? report.dataset.mwv : report.dataset.wv);
  }
  auto summary = open_out(dir / "summary.csv");
  write_summary_csv(summary, report.conditions);
}

}  // namespace defmag
