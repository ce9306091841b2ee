// cli.hpp - argument parsing for the udreorder tool.
//
// Thin CLI11 wrapper over the cmd_* functions in pipeline.hpp. Subcommand
// options may also come from an INI/TOML file via --config; command-line
// values win. Parse problems exit 1, data problems exit 2.

#pragma once

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "udreorder/pipeline.hpp"

namespace udreorder {

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Learn pairwise ordering preferences from UD treebanks and "
               "reorder dependency trees to match them"};
  app.require_subcommand(0, 1);
  app.set_config("--config", "", "read options from an INI/TOML file");
  app.set_version_flag("--version", "udreorder 1.0.0");

  // The pipeline is deterministic end to end; a seed option is a category
  // error and gets rejected loudly instead of being silently accepted.
  bool seed_flag = false;
  app.add_flag("--seed-irrelevant", seed_flag)->group("");

  EstimateOptions est;
  auto* estimate = app.add_subcommand(
      "estimate", "count pairwise child orderings in CoNLL-U input");
  estimate->fallthrough();
  estimate->add_option("input", est.inputs, "CoNLL-U files")
      ->required()
      ->check(CLI::ExistingFile);
  estimate->add_option("--lang", est.language, "language code stored in the table")
      ->required();
  estimate
      ->add_option("--granularity", est.granularity,
                   "deprel label granularity: universal or subtyped")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Granularity>{{"universal", Granularity::universal},
                                             {"subtyped", Granularity::subtyped}}));
  estimate->add_option("--treebank", est.treebanks,
                       "treebank name per input (default: file name)");
  estimate->add_option("--output,-o", est.output, "output path (default: stdout)");
  estimate->add_flag("--lenient", est.lenient, "skip malformed sentences");
  estimate->add_option("--report", est.report_path, "write a run report here");

  DeriveOptions der;
  auto* derive =
      app.add_subcommand("derive", "turn a distribution table into constraints");
  derive->fallthrough();
  derive->add_option("pods", der.pods, "distribution table (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  derive->add_option("--min-count", der.min_count,
                     "require at least this many observations per pair");
  derive->add_option("--margin", der.margin,
                     "require probability above 0.5 + margin");
  derive->add_option("--output,-o", der.output, "output path (default: stdout)");
  derive->add_option("--report", der.report_path, "write a run report here");

  ReorderOptions reo;
  auto* reorder =
      app.add_subcommand("reorder", "reorder CoNLL-U trees under constraints");
  reorder->fallthrough();
  reorder->add_option("input", reo.input, "CoNLL-U file")
      ->required()
      ->check(CLI::ExistingFile);
  reorder
      ->add_option("--constraints,-c", reo.constraints,
                   "constraint set or distribution table (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  auto* reo_min = reorder->add_option(
      "--min-count", reo.min_count,
      "when given a table: observations needed per pair");
  auto* reo_margin = reorder->add_option(
      "--margin", reo.margin, "when given a table: probability above 0.5 + margin");
  reorder->add_option("--spans", reo.spans,
                      "locked spans sidecar (JSON, keyed by sent_id)");
  reorder->add_option("--text", reo.text_out,
                      "write reordered surface text here, one line per sentence");
  reorder->add_option("--align", reo.align_out,
                      "write token alignments here (JSON, keyed by sent_id)");
  reorder->add_option("--output,-o", reo.output, "output path (default: stdout)");
  reorder->add_flag("--lenient", reo.lenient, "skip malformed sentences");
  reorder->add_flag("--skip-empty-nodes", reo.skip_empty_nodes,
                    "skip sentences with enhanced-only nodes instead of dropping them");
  reorder->add_option("--report", reo.report_path, "write a run report here");

  EnsembleOptions ens;
  auto* ensemble = app.add_subcommand(
      "ensemble", "concatenate a vanilla and a reordered treebank");
  ensemble->fallthrough();
  ensemble->add_option("vanilla", ens.vanilla, "original CoNLL-U file")
      ->required()
      ->check(CLI::ExistingFile);
  ensemble->add_option("reordered", ens.reordered, "reordered CoNLL-U file")
      ->required()
      ->check(CLI::ExistingFile);
  ensemble->add_option("--output,-o", ens.output, "output path (default: stdout)");
  ensemble->add_flag("--lenient", ens.lenient, "skip malformed sentences");
  ensemble->add_option("--report", ens.report_path, "write a run report here");

  CompareOptions cmp;
  auto* compare =
      app.add_subcommand("compare", "measure divergence between two tables");
  compare->fallthrough();
  compare->add_option("pods_a", cmp.pods_a, "first table")
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("pods_b", cmp.pods_b, "second table")
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("--output,-o", cmp.output, "output path (default: stdout)");
  compare->add_option("--report", cmp.report_path, "write a run report here");

  ReportOptions rep;
  auto* report = app.add_subcommand("report", "pretty-print a run report");
  report->fallthrough();
  report->add_option("input", rep.input, "run report (JSON)")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << app.version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (seed_flag) {
    err << "error: --seed-irrelevant: output is fully determined by the "
           "inputs; there is no randomness to seed\n";
    return kExitUsage;
  }

  if (estimate->parsed()) return cmd_estimate(est, out, err);
  if (derive->parsed()) return cmd_derive(der, out, err);
  if (reorder->parsed()) {
    reo.min_count_set = reo_min->count() > 0;
    reo.margin_set = reo_margin->count() > 0;
    return cmd_reorder(reo, out, err);
  }
  if (ensemble->parsed()) return cmd_ensemble(ens, out, err);
  if (compare->parsed()) return cmd_compare(cmp, out, err);
  if (report->parsed()) return cmd_report(rep, out, err);

  out << app.help();
  return kExitUsage;
}

}  // namespace udreorder
