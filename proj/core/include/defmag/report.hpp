#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>

#include "defmag/cross_validation.hpp"
#include "defmag/pipeline.hpp"

namespace defmag {

/// 7x7 table: header row and column of class codes, row percentages.
void write_confusion_csv(std::ostream& out, const CvResult& cv);
/// `accuracy,<mean>,<std>`
void write_accuracy_line(std::ostream& out, const CvResult& cv);
/// Header `condition,accuracy,std` and one row per condition.
void write_summary_csv(std::ostream& out, std::span<const ConditionResult> results);
/// sequence,label,frame,min,mean,max
void write_trajectory_csv(std::ostream& out, const Dataset& dataset,
                          const std::vector<SequenceFeatures>& data);
/// sequence,label,subject,fold,predicted
void write_predictions_csv(std::ostream& out, const Dataset& dataset, const CvResult& cv);

/// confusion_<C>.csv, predictions_<C>.csv and trajectory_<C>.csv per
/// condition plus summary.csv.
void export_report(const std::filesystem::path& dir, const RunReport& report);

/// Fixed six-decimal rendering used by every report.
std::string format_fixed(double value);

}  // namespace defmag
