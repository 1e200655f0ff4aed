//! Parse an edge list, inspect neighbours, attach node types.
//!
//! ```bash
//! cargo run --example load_graph
//! cargo run --example load_graph -- path/to/graph.edges --directed
//! ```

use aspect_embed::graph::{EdgeListOptions, Graph};

const SAMPLE: &str = "\
# toy citation graph
alice bob
bob carol
carol alice
carol dave
dave dave
bob alice
";

fn main() -> aspect_embed::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let directed = args.iter().any(|a| a == "--directed");
    let options = EdgeListOptions::directed(directed);
    let graph = match args.iter().find(|a| !a.starts_with("--")) {
        Some(path) => Graph::load_edge_list(path, options)?,
        None => Graph::parse_edge_list(SAMPLE, options)?,
    };

    let stats = graph.stats();
    println!(
        "{} nodes, {} edges ({} lines, {} self-loops and {} duplicates dropped)",
        graph.node_count(),
        graph.edge_count(),
        stats.edge_lines,
        stats.self_loops_dropped,
        stats.duplicates_dropped
    );
    println!("content hash {}", &graph.content_hash()[..16]);

    for v in 0..graph.node_count().min(10) as u32 {
        let names: Vec<&str> = graph.neighbors(v)?.iter().map(|&u| graph.label(u)).collect();
        println!("{:>8} -> {}", graph.label(v), names.join(" "));
    }
    if let Err(e) = graph.neighbors(graph.node_count() as u32) {
        println!("out-of-range lookup: {e}");
    }

    if args.is_empty() {
        let mut typed = graph.clone();
        typed.read_types("alice A\nbob A\ncarol P\ndave P\n".as_bytes())?;
        let types = typed.types().unwrap();
        for v in 0..typed.node_count() as u32 {
            println!("{} is {}", typed.label(v), types.name(types.of(v)));
        }
    }
    Ok(())
}
