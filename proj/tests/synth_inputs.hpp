#pragma once

// ScenarioInputs over a synthetic bilingual world: normalized spaces, a
// Procrustes(+RCSLS) map from b into a, and lexicon translators both ways.

#include <memory>

#include "xling/align.hpp"
#include "xling/experiment.hpp"
#include "xling/synth.hpp"
#include "xling/translate.hpp"

namespace xling::testing {

struct SynthInputs {
  std::unique_ptr<EmbeddingSpace> space_a;
  std::unique_ptr<EmbeddingSpace> space_b;
  ScenarioInputs inputs;
};

inline SynthInputs make_inputs(const SyntheticBilingual& w, bool rcsls = true) {
  SynthInputs out;
  out.space_a = std::make_unique<EmbeddingSpace>(normalize(w.space_a));
  out.space_b = std::make_unique<EmbeddingSpace>(normalize(w.space_b));
  const std::string a = out.space_a->language();
  const std::string b = out.space_b->language();
  out.inputs.spaces[a] = out.space_a.get();
  out.inputs.spaces[b] = out.space_b.get();
  out.inputs.corpora[a] = w.corpus_a;
  out.inputs.corpora[b] = w.corpus_b;

  SeedDictionary reverse;
  for (const auto& [s, t] : w.dictionary.pairs) reverse.add(t, s);
  AlignmentMap map = fit_procrustes(*out.space_b, *out.space_a, reverse);
  if (rcsls) map = fit_rcsls(*out.space_b, *out.space_a, reverse, map, AlignHyper{});
  out.inputs.maps[{b, a}] = map;

  auto forward = BilingualLexicon::from_dictionary(w.dictionary, a, b);
  out.inputs.translators[{a, b}] = TranslatorSpec{LexiconTranslator{forward, OovPolicy::keep}};
  out.inputs.translators[{b, a}] = TranslatorSpec{LexiconTranslator{forward.inverted(), OovPolicy::keep}};
  return out;
}

}  // namespace xling::testing
