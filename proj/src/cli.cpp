// Copyright 2026 The mmLayout Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mmlayout/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <regex>

#include "mmlayout/error.hpp"
#include "mmlayout/gradcheck.hpp"
#include "mmlayout/render.hpp"
#include "mmlayout/synth.hpp"
#include "mmlayout/trainer.hpp"

namespace mmlayout {
namespace {

PatchGrid parse_grid(const std::string& s) {
  static const std::regex re("^(\\d+)[xX](\\d+)$");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw ValidationError("--grid must look like WxH, got '" + s + "'");
  PatchGrid g{std::stoi(m[1]), std::stoi(m[2])};
  if (g.cols < 1 || g.rows < 1) throw ValidationError("--grid dimensions must be positive");
  return g;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ValidationError("cannot write " + path);
  f << text;
}

std::string prf_line(const Prf& p) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "precision %.4f recall %.4f f1 %.4f", p.precision, p.recall, p.f1);
  return buf;
}

nlohmann::json prf_json(const Prf& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1},
          {"true_positives", p.true_positives}, {"predicted", p.predicted}, {"gold", p.gold}};
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"mmLayout: multi-grained document understanding on OCR pages"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  // build-graph
  auto* bg = app.add_subcommand("build-graph", "Cluster segments into salient regions and write the document graph");
  std::string bg_input, bg_output, bg_grid = "7x7";
  double bg_radius = 30;
  int bg_min_pts = 1;
  bg->add_option("--input", bg_input, "Document JSON")->required();
  bg->add_option("--radius", bg_radius, "Clustering radius r in page units")->capture_default_str();
  bg->add_option("--min-pts", bg_min_pts, "Minimum neighbours for a core segment")->capture_default_str();
  bg->add_option("--grid", bg_grid, "Patch grid WxH")->capture_default_str();
  bg->add_option("--output", bg_output, "Graph JSON path (stdout when omitted)");

  // render
  auto* rd = app.add_subcommand("render", "Draw segments and salient regions as SVG");
  std::string rd_input, rd_svg;
  double rd_radius = 30;
  int rd_min_pts = 1;
  rd->add_option("--input", rd_input, "Document JSON")->required();
  rd->add_option("--radius", rd_radius, "Clustering radius r")->capture_default_str();
  rd->add_option("--min-pts", rd_min_pts, "Minimum neighbours for a core segment")->capture_default_str();
  rd->add_option("--svg-out", rd_svg, "SVG path (stdout when omitted)");

  // synth
  auto* sy = app.add_subcommand("synth", "Generate a labelled synthetic form corpus");
  SynthParams sp;
  std::string sy_out;
  sy->add_option("--seed", sp.seed, "Generator seed")->capture_default_str();
  sy->add_option("--count", sp.count, "Number of documents")->capture_default_str();
  sy->add_option("--out", sy_out, "Output corpus directory")->required();
  sy->add_flag("--region-cue", sp.region_cue, "Label item lists by the size of their salient region");
  sy->add_option("--image-scale", sp.image_scale, "Raster size as a fraction of the page; 0 for no images")
      ->capture_default_str();
  sy->add_option("--reference-radius", sp.reference_radius, "Radius used for region-dependent labels")
      ->capture_default_str();

  // train
  auto* tr = app.add_subcommand("train", "Fine-tune a model on a labelled corpus");
  std::string tr_corpus, tr_config, tr_out, tr_dev;
  tr->add_option("--corpus", tr_corpus, "Corpus directory")->required();
  tr->add_option("--config", tr_config, "Run config JSON {\"model\":{...},\"train\":{...}}");
  tr->add_option("--out", tr_out, "Output directory")->required();
  tr->add_option("--dev-corpus", tr_dev, "Evaluation corpus (default: holdout split of --corpus)");

  // eval
  auto* ev = app.add_subcommand("eval", "Entity-level evaluation of a checkpoint");
  std::string ev_ckpt, ev_corpus, ev_pred, ev_dump;
  ev->add_option("--checkpoint", ev_ckpt, "Checkpoint file")->required();
  ev->add_option("--corpus", ev_corpus, "Corpus directory")->required();
  ev->add_option("--predictions-out", ev_pred, "Write predicted word tags as JSON lines");
  ev->add_option("--dump-intermediates", ev_dump, "Write per-stage tensor shapes and norms as JSON");

  // ablate
  auto* ab = app.add_subcommand("ablate", "Run an ablation grid and write a CSV table");
  std::string ab_axis, ab_corpus, ab_out, ab_config, ab_test;
  int ab_seeds = 3;
  ab->add_option("--axis", ab_axis, "Ablation axis")
      ->required()
      ->check(CLI::IsMember({"components", "coarse_layers", "radius"}));
  ab->add_option("--corpus", ab_corpus, "Training corpus directory")->required();
  ab->add_option("--out", ab_out, "CSV output path")->required();
  ab->add_option("--config", ab_config, "Base run config JSON");
  ab->add_option("--test-corpus", ab_test, "Evaluation corpus (default: holdout split of --corpus)");
  ab->add_option("--seeds", ab_seeds, "Number of seeds averaged per run")->capture_default_str()->check(CLI::PositiveNumber);

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the full model gradient");
  std::uint64_t gc_seed = 0;
  double gc_tol = 1e-4;
  gc->add_option("--seed", gc_seed, "Parameter seed")->capture_default_str();
  gc->add_option("--tolerance", gc_tol, "Maximum accepted relative error")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }

  try {
    if (*bg) {
      const Page page = load_document(bg_input);
      const DocumentGraph g = build_graph(page, {bg_radius, bg_min_pts}, parse_grid(bg_grid));
      write_text(bg_output, graph_to_json(g, 2) + "\n", out);
    } else if (*rd) {
      const Page page = load_document(rd_input);
      const auto regions = detect_salient_regions(page.segments, {rd_radius, rd_min_pts});
      write_text(rd_svg, render_svg(page, regions), out);
    } else if (*sy) {
      write_corpus(sy_out, synth_generate(sp));
      out << "wrote " << sp.count << " documents to " << sy_out << "\n";
    } else if (*tr) {
      const RunConfig rc = tr_config.empty() ? RunConfig{} : load_run_config(tr_config);
      rc.model.validate();
      rc.train.validate();
      std::vector<Page> train_pages, dev_pages;
      if (tr_dev.empty()) {
        std::tie(train_pages, dev_pages) = split_holdout(load_corpus(tr_corpus), rc.train.holdout_fraction);
      } else {
        train_pages = load_corpus(tr_corpus);
        dev_pages = load_corpus(tr_dev);
      }
      MmLayoutModel model(rc.model, Vocab::build(train_pages, static_cast<size_t>(rc.model.vocab_size)));
      const auto train_docs = prepare_all(model, train_pages);
      const auto dev_docs = prepare_all(model, dev_pages);
      std::filesystem::create_directories(tr_out);
      model.vocab().save(std::filesystem::path(tr_out) / "vocab.txt");
      write_text((std::filesystem::path(tr_out) / "config.json").string(),
                 nlohmann::json{{"model", to_json(rc.model)}, {"train", to_json(rc.train)}}.dump(2) + "\n", out);
      out << "training on " << train_docs.size() << " documents, evaluating on " << dev_docs.size() << "\n";
      TrainOptions opts;
      opts.out_dir = tr_out;
      opts.on_log = [&out](const nlohmann::json& rec) { out << rec.dump() << "\n" << std::flush; };
      const TrainResult res = train(model, train_docs, dev_docs, rc.train, opts);
      save_model(std::filesystem::path(tr_out) / "final.ckpt", model, {{"step", res.steps}});
      out << "best dev f1 " << res.best_f1 << " at step " << res.best_step << "\n";
    } else if (*ev) {
      const auto model = load_model(ev_ckpt);
      const std::vector<Page> pages = load_corpus(ev_corpus);
      check_labels(*model, pages);
      const auto docs = prepare_all(*model, pages);
      const EvalResult r = evaluate(*model, docs);
      nlohmann::json report;
      report["documents"] = docs.size();
      report["micro"] = prf_json(r.micro);
      report["per_type"] = nlohmann::json::object();
      for (const auto& [type, p] : r.per_type) report["per_type"][type] = prf_json(p);
      out << report.dump(2) << "\n";
      if (!ev_pred.empty()) {
        std::string lines;
        for (const auto& p : r.predictions) lines += nlohmann::json(p).dump() + "\n";
        write_text(ev_pred, lines, out);
      }
      if (!ev_dump.empty()) {
        NoGradGuard guard;
        nlohmann::json dump = nlohmann::json::array();
        for (const auto& d : docs) dump.push_back(MmLayoutModel::describe(model->forward(d)));
        write_text(ev_dump, dump.dump(2) + "\n", out);
      }
    } else if (*ab) {
      const RunConfig rc = ab_config.empty() ? RunConfig{} : load_run_config(ab_config);
      std::vector<Page> train_pages, test_pages;
      if (ab_test.empty()) {
        std::tie(train_pages, test_pages) = split_holdout(load_corpus(ab_corpus), rc.train.holdout_fraction);
      } else {
        train_pages = load_corpus(ab_corpus);
        test_pages = load_corpus(ab_test);
      }
      std::vector<std::uint64_t> seeds;
      for (int i = 0; i < ab_seeds; ++i) seeds.push_back(static_cast<std::uint64_t>(i));
      const auto rows = ablate(train_pages, test_pages, rc.model, rc.train, ab_axis, seeds,
                               [&err](const std::string& msg) { err << msg << "\n" << std::flush; });
      const std::string csv = ablation_csv(rows);
      write_text(ab_out, csv, out);
      for (const auto& r : rows) out << r.run << ": " << prf_line(r.mean) << "\n";
    } else if (*gc) {
      const GradCheckResult r = run_model_grad_check(gradcheck_config(gc_seed), gradcheck_document());
      char buf[256];
      std::snprintf(buf, sizeof(buf), "max relative error %.3e (worst %s[%zu], %zu entries)\n", r.max_rel_error,
                    r.worst_param.c_str(), r.worst_index, r.checked);
      out << buf;
      if (!(r.max_rel_error < gc_tol)) {
        err << "gradient check failed: tolerance " << gc_tol << "\n";
        return 1;
      }
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace mmlayout
