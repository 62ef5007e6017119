#ifndef SADIH_EVAL_HPP_
#define SADIH_EVAL_HPP_

// Retrieval metrics over full Hamming rankings, with relevance defined by
// equal class labels, and their CSV / JSON-lines reports.

#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sadih/index.hpp"

namespace sadih {

// AP over a full ranking; 0 when nothing is relevant.
inline double average_precision(std::span<const std::uint8_t> relevant) {
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t p = 0; p < relevant.size(); ++p) {
    if (relevant[p]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(p + 1);
    }
  }
  return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

struct PrPoint {
  Index cutoff = 0;
  double recall = 0.0;
  double precision = 0.0;
};

struct RetrievalMetrics {
  double map = 0.0;
  Index k = 0;
  double precision_at_k = 0.0;
  std::vector<double> average_precisions;  // per query
  std::vector<PrPoint> pr;                 // cutoffs 1..n, averaged over queries
};

// One ranking per query. k is clamped to the database size.
inline RetrievalMetrics evaluate_retrieval(const PackedCodes& queries, const LabelSet& query_labels,
                                           const PackedCodes& db, const LabelSet& db_labels,
                                           Index k = 100) {
  check_same_length(queries, db);
  if (queries.size() != query_labels.size() || db.size() != db_labels.size()) {
    throw DataError("code and label counts differ");
  }
  if (db.size() == 0) throw DataError("empty database");
  const Index n = db.size();
  const Index cut = std::min(std::max<Index>(k, 1), n);
  RetrievalMetrics m;
  m.k = cut;
  m.pr.resize(static_cast<std::size_t>(n));
  std::vector<double> recall_sum(static_cast<std::size_t>(n), 0.0);
  std::vector<double> precision_sum(static_cast<std::size_t>(n), 0.0);
  std::vector<std::uint8_t> relevant(static_cast<std::size_t>(n));
  double precision_total = 0.0;

  for (Index q = 0; q < queries.size(); ++q) {
    const std::vector<Index> order = rank(queries.code(q), db);
    Index total_relevant = 0;
    for (Index r = 0; r < n; ++r) {
      relevant[static_cast<std::size_t>(r)] = db_labels[order[static_cast<std::size_t>(r)]] == query_labels[q];
      total_relevant += relevant[static_cast<std::size_t>(r)];
    }
    m.average_precisions.push_back(average_precision(relevant));
    Index hits = 0;
    for (Index r = 0; r < n; ++r) {
      hits += relevant[static_cast<std::size_t>(r)];
      if (r + 1 == cut) precision_total += static_cast<double>(hits) / static_cast<double>(cut);
      if (total_relevant > 0) {
        recall_sum[static_cast<std::size_t>(r)] +=
            static_cast<double>(hits) / static_cast<double>(total_relevant);
      }
      precision_sum[static_cast<std::size_t>(r)] += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  const double nq = static_cast<double>(queries.size());
  if (queries.size() > 0) {
    double ap_total = 0.0;
    for (double ap : m.average_precisions) ap_total += ap;
    m.map = ap_total / nq;
    m.precision_at_k = precision_total / nq;
  }
  for (Index r = 0; r < n; ++r) {
    const auto i = static_cast<std::size_t>(r);
    m.pr[i] = {r + 1, queries.size() > 0 ? recall_sum[i] / nq : 0.0,
               queries.size() > 0 ? precision_sum[i] / nq : 0.0};
  }
  return m;
}

inline double map_score(const PackedCodes& queries, const LabelSet& query_labels,
                        const PackedCodes& db, const LabelSet& db_labels) {
  return evaluate_retrieval(queries, query_labels, db, db_labels).map;
}

inline double precision_at_k(const PackedCodes& queries, const LabelSet& query_labels,
                             const PackedCodes& db, const LabelSet& db_labels, Index k = 100) {
  return evaluate_retrieval(queries, query_labels, db, db_labels, k).precision_at_k;
}

inline std::vector<PrPoint> pr_curve(const PackedCodes& queries, const LabelSet& query_labels,
                                     const PackedCodes& db, const LabelSet& db_labels) {
  return evaluate_retrieval(queries, query_labels, db, db_labels).pr;
}

// ---------------------------------------------------------------------------
// Reports

struct ReportRow {
  std::string method;
  int bits = 0;
  std::string metric;
  double value = 0.0;
};

enum class ReportFormat { kCsv, kJsonLines };

inline std::string format_value(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

inline void emit_report(const std::vector<ReportRow>& rows, const std::string& path,
                        ReportFormat format) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report '" + path + "'");
  if (format == ReportFormat::kCsv) {
    out << "method,bits,metric,value\n";
    for (const auto& r : rows) {
      out << r.method << ',' << r.bits << ',' << r.metric << ',' << format_value(r.value) << '\n';
    }
  } else {
    for (const auto& r : rows) {
      nlohmann::ordered_json j;
      j["method"] = r.method;
      j["bits"] = r.bits;
      j["metric"] = r.metric;
      j["value"] = std::stod(format_value(r.value));
      out << j.dump() << '\n';
    }
  }
}

inline std::vector<ReportRow> read_report(const std::string& path, ReportFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report '" + path + "'");
  std::vector<ReportRow> rows;
  std::string line;
  if (format == ReportFormat::kCsv) {
    std::getline(in, line);
    if (line != "method,bits,metric,value") throw DataError(path + ": unexpected report header");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      ReportRow r;
      std::string bits, value;
      std::getline(ss, r.method, ',');
      std::getline(ss, bits, ',');
      std::getline(ss, r.metric, ',');
      std::getline(ss, value, ',');
      r.bits = std::stoi(bits);
      r.value = std::stod(value);
      rows.push_back(std::move(r));
    }
  } else {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      rows.push_back({j.at("method").get<std::string>(), j.at("bits").get<int>(),
                      j.at("metric").get<std::string>(), j.at("value").get<double>()});
    }
  }
  return rows;
}

inline void write_pr_curve(const std::string& path, const std::vector<PrPoint>& points) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "cutoff,recall,precision\n";
  for (const auto& p : points) {
    out << p.cutoff << ',' << format_value(p.recall) << ',' << format_value(p.precision) << '\n';
  }
}

}  // namespace sadih

#endif  // SADIH_EVAL_HPP_
