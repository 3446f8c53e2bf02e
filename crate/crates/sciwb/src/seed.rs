//! The bundled seed workspace written by `sciwb init`.

pub const FILES: &[(&str, &str)] = &[
    ("connectives.json", include_str!("../seed/connectives.json")),
    ("corpus/doc-annotation-guide/annotations.json", include_str!("../seed/corpus/doc-annotation-guide/annotations.json")),
    ("corpus/doc-annotation-guide/introduction.txt", include_str!("../seed/corpus/doc-annotation-guide/introduction.txt")),
    ("corpus/doc-annotation-guide/meta.json", include_str!("../seed/corpus/doc-annotation-guide/meta.json")),
    ("corpus/doc-cafe-noise/annotations.json", include_str!("../seed/corpus/doc-cafe-noise/annotations.json")),
    ("corpus/doc-cafe-noise/introduction.txt", include_str!("../seed/corpus/doc-cafe-noise/introduction.txt")),
    ("corpus/doc-cafe-noise/meta.json", include_str!("../seed/corpus/doc-cafe-noise/meta.json")),
    ("corpus/doc-graph-coloring/annotations.json", include_str!("../seed/corpus/doc-graph-coloring/annotations.json")),
    ("corpus/doc-graph-coloring/introduction.txt", include_str!("../seed/corpus/doc-graph-coloring/introduction.txt")),
    ("corpus/doc-graph-coloring/meta.json", include_str!("../seed/corpus/doc-graph-coloring/meta.json")),
    ("corpus/doc-merge-queue/annotations.json", include_str!("../seed/corpus/doc-merge-queue/annotations.json")),
    ("corpus/doc-merge-queue/introduction.txt", include_str!("../seed/corpus/doc-merge-queue/introduction.txt")),
    ("corpus/doc-merge-queue/meta.json", include_str!("../seed/corpus/doc-merge-queue/meta.json")),
    ("corpus/doc-peer-feedback/annotations.json", include_str!("../seed/corpus/doc-peer-feedback/annotations.json")),
    ("corpus/doc-peer-feedback/introduction.txt", include_str!("../seed/corpus/doc-peer-feedback/introduction.txt")),
    ("corpus/doc-peer-feedback/meta.json", include_str!("../seed/corpus/doc-peer-feedback/meta.json")),
    ("corpus/doc-soil-moisture/annotations.json", include_str!("../seed/corpus/doc-soil-moisture/annotations.json")),
    ("corpus/doc-soil-moisture/introduction.txt", include_str!("../seed/corpus/doc-soil-moisture/introduction.txt")),
    ("corpus/doc-soil-moisture/meta.json", include_str!("../seed/corpus/doc-soil-moisture/meta.json")),
    ("guidelines.json", include_str!("../seed/guidelines.json")),
    ("phrasebank.json", include_str!("../seed/phrasebank.json")),
    ("quiz/intro-structure.json", include_str!("../seed/quiz/intro-structure.json")),
    ("taxonomy.json", include_str!("../seed/taxonomy.json")),
    ("wordiness.json", include_str!("../seed/wordiness.json")),
];
