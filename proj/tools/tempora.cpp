// tempora: predict the period a text was written in from word and POS n-grams.

#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "tempora/commands.hpp"

int main(int argc, char** argv) {
    tempora::RunConfig cfg;

    CLI::App app{"Temporal text classification from word and POS n-gram features"};
    app.set_config("--config", "", "Read options from a TOML/INI file; command-line flags win");
    app.require_subcommand(1);
    app.fallthrough();

    app.add_option("--manifest", cfg.manifest, "CSV manifest with header id,year,path");
    app.add_option("--data", cfg.data_dir, "Directory for relative manifest paths (default: manifest's directory)");
    app.add_option("--composites", cfg.composites_dir, "Composite corpus directory written by `compose`");
    app.add_option("--input", cfg.inputs, "Vertical files to classify (predict)");
    app.add_option("--model-file", cfg.model_path, "Model file to write (train) or read (predict, features)");
    app.add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    app.add_option("--boundary-tag", cfg.boundary_tag, "POS tag that ends a sentence")->capture_default_str();
    app.add_option("--binning", cfg.binning, "century | century:A-B | years:N[:ORIGIN] | edges:Y0,Y1,...")
        ->capture_default_str();
    app.add_flag("--compose", cfg.compose, "cv/train: build composites from the manifest in memory first");
    app.add_option("--target-tokens", cfg.target_tokens, "Minimum tokens per composite")->capture_default_str();
    app.add_option("--docs-per-class", cfg.docs_per_class, "Composites generated per class")->capture_default_str();
    app.add_option("--features", cfg.features, "{word,pos}{1,2,3} joined by '+', e.g. word1+pos3")
        ->capture_default_str();
    app.add_option("--min-doc-freq", cfg.min_doc_freq, "Drop n-grams seen in fewer training documents")
        ->capture_default_str();
    app.add_option("--weighting", cfg.weighting, "raw-count | l2-normalized")->capture_default_str();
    app.add_option("--model", cfg.model, "mnb | svm")->capture_default_str();
    app.add_option("-C,--C", cfg.C, "SVM regularization constant")->capture_default_str();
    app.add_option("--tol", cfg.tol, "SVM stopping tolerance (projected gradient spread)")->capture_default_str();
    app.add_option("--max-iter", cfg.max_iter, "SVM epochs per class")->capture_default_str();
    app.add_option("--alpha", cfg.alpha, "MNB additive smoothing")->capture_default_str();
    app.add_option("--k", cfg.k, "Cross-validation folds")->capture_default_str();
    app.add_option("--seed", cfg.seed, "Top-level random seed")->capture_default_str();
    app.add_option("--top", cfg.top, "Features per class (features)")->capture_default_str();
    app.add_flag("--negative", cfg.negative, "Also list the most negative weights (features)");

    auto* ingest = app.add_subcommand("ingest", "Load a corpus and report per-class counts");
    auto* compose = app.add_subcommand("compose", "Generate composite documents per class");
    auto* cv = app.add_subcommand("cv", "Stratified k-fold cross-validation");
    auto* train = app.add_subcommand("train", "Train a model and write a model file");
    auto* predict = app.add_subcommand("predict", "Classify documents with a model file");
    auto* features = app.add_subcommand("features", "Rank the most informative features per class");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed())
            tempora::run_ingest(cfg, std::cout);
        else if (compose->parsed())
            tempora::run_compose(cfg, std::cout);
        else if (cv->parsed())
            tempora::run_cv(cfg, std::cout);
        else if (train->parsed())
            tempora::run_train(cfg, std::cout);
        else if (predict->parsed())
            tempora::run_predict(cfg, std::cout);
        else if (features->parsed())
            tempora::run_features(cfg, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "tempora: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
