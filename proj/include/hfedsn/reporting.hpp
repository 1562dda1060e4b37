#pragma once

#include <string>

#include "hfedsn/config.hpp"
#include "hfedsn/orchestrator.hpp"

namespace hfedsn {

// Writers below format floating point values with fixed six-decimal printf
// formatting so repeated runs produce byte-identical files.

void write_metrics_csv(const std::string& path, const TrainingReport& report);

void write_comm_csv(const std::string& path, const CommMeter& meter);

void write_summary_json(const std::string& path, const ExperimentConfig& config,
                        const TrainingReport& report);

std::string format_fixed(double value, int decimals = 6);

}  // namespace hfedsn
