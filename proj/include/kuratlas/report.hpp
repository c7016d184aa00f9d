#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kuratlas {

/// One diagnostic finding. `pass == false` entries carry a witness string.
struct CheckItem {
  std::string check;    // e.g. "tame.eq:tame1"
  bool pass = true;
  std::string witness;  // empty on pass
};

struct CheckReport {
  std::vector<CheckItem> items;

  bool ok() const {
    for (const auto& it : items)
      if (!it.pass) return false;
    return true;
  }

  void add(const std::string& check, bool pass, const std::string& witness = "") {
    items.push_back({check, pass, pass ? "" : witness});
  }

  void merge(const CheckReport& o) {
    items.insert(items.end(), o.items.begin(), o.items.end());
  }

  std::vector<CheckItem> failures() const {
    std::vector<CheckItem> f;
    for (const auto& it : items)
      if (!it.pass) f.push_back(it);
    return f;
  }

  std::string first_failure() const {
    for (const auto& it : items)
      if (!it.pass) return it.check + ": " + it.witness;
    return "";
  }
};

/// Error taxonomy used across modules. Codes match the operation contracts.
enum class Errc {
  MalformedPoset,
  GenerationFailure,
  ResolutionTooCoarse,
  HypothesisViolated,
  EmptyRestriction,
  DegenerateSimplex,
  DomainMismatch,
  FiltrationViolated,
  RealizationInconsistent,
  FormulaMismatch,
  DeltaTooLarge,
  RejectionBudgetExceeded,
  NonTransverseZero,
  OrientationClash,
  WeightInconsistent,
  MultiplicativityFailure,
  CompletionFailure,
  EmbeddingInvalid,
  TrivializationInvalid,
  PartitionDegenerate,
  ParseError,
  UnknownExample,
  SizeLimit,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::MalformedPoset: return "MalformedPoset";
    case Errc::GenerationFailure: return "GenerationFailure";
    case Errc::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case Errc::HypothesisViolated: return "HypothesisViolated";
    case Errc::EmptyRestriction: return "EmptyRestriction";
    case Errc::DegenerateSimplex: return "DegenerateSimplex";
    case Errc::DomainMismatch: return "DomainMismatch";
    case Errc::FiltrationViolated: return "FiltrationViolated";
    case Errc::RealizationInconsistent: return "RealizationInconsistent";
    case Errc::FormulaMismatch: return "FormulaMismatch";
    case Errc::DeltaTooLarge: return "DeltaTooLarge";
    case Errc::RejectionBudgetExceeded: return "RejectionBudgetExceeded";
    case Errc::NonTransverseZero: return "NonTransverseZero";
    case Errc::OrientationClash: return "OrientationClash";
    case Errc::WeightInconsistent: return "WeightInconsistent";
    case Errc::MultiplicativityFailure: return "MultiplicativityFailure";
    case Errc::CompletionFailure: return "CompletionFailure";
    case Errc::EmbeddingInvalid: return "EmbeddingInvalid";
    case Errc::TrivializationInvalid: return "TrivializationInvalid";
    case Errc::PartitionDegenerate: return "PartitionDegenerate";
    case Errc::ParseError: return "ParseError";
    case Errc::UnknownExample: return "UnknownExample";
    case Errc::SizeLimit: return "SizeLimit";
  }
  return "Unknown";
}

struct AtlasError : std::runtime_error {
  Errc code;
  AtlasError(Errc c, const std::string& what)
      : std::runtime_error(std::string(errc_name(c)) + ": " + what), code(c) {}
};

[[noreturn]] inline void fail(Errc c, const std::string& what) {
  throw AtlasError(c, what);
}

}  // namespace kuratlas
