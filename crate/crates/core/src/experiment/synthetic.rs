use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::FeatureTable;
use crate::error::{Error, Result};
use crate::graph::{EdgeType, NodeId, NodeLabel, PropertyGraph, Props};

/// Planted-signal data set.
///
/// Artist `i` has home style `i mod S` and home genre `(i + i div S) mod G`.
/// Each artwork takes its artist's home style with probability
/// `context_signal`, otherwise a uniformly drawn other style; genres follow
/// the same rule. One Movement per home style groups the artists sharing it.
///
/// An artwork's visual vector is its artist's prototype (standard normal
/// entries, fixed per seed) plus Gaussian noise of standard deviation
/// `visual_noise`. Style and genre are visible only through the artist, so
/// a classifier has to learn the artist-to-home-style mapping that the graph
/// context spells out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub num_artists: usize,
    pub num_styles: usize,
    pub num_genres: usize,
    pub artworks_per_artist: usize,
    pub visual_noise: f64,
    pub context_signal: f64,
    pub visual_dim: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            num_artists: 20,
            num_styles: 5,
            num_genres: 5,
            artworks_per_artist: 100,
            visual_noise: 1.0,
            context_signal: 0.9,
            visual_dim: 16,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("num_artists", self.num_artists),
            ("num_styles", self.num_styles),
            ("num_genres", self.num_genres),
            ("artworks_per_artist", self.artworks_per_artist),
            ("visual_dim", self.visual_dim),
        ] {
            if v == 0 {
                return Err(Error::validation(format!("{name} must be at least 1")));
            }
        }
        if !(0.0..=1.0).contains(&self.context_signal) {
            return Err(Error::validation("context_signal must lie in [0, 1]"));
        }
        if !(self.visual_noise >= 0.0 && self.visual_noise.is_finite()) {
            return Err(Error::validation("visual_noise must be a non-negative number"));
        }
        Ok(())
    }

    pub fn home_style(&self, artist: usize) -> usize {
        artist % self.num_styles
    }

    pub fn home_genre(&self, artist: usize) -> usize {
        (artist + artist / self.num_styles) % self.num_genres
    }

    pub fn num_movements(&self) -> usize {
        self.num_artists.min(self.num_styles)
    }

    pub fn expected_nodes(&self) -> usize {
        let a = self.num_artists;
        a + self.num_styles + self.num_genres + self.num_movements() + a * self.artworks_per_artist
    }

    pub fn expected_edges(&self) -> usize {
        let a = self.num_artists;
        3 * a * self.artworks_per_artist + a
    }
}

fn width(n: usize) -> usize {
    n.saturating_sub(1).to_string().len()
}

fn planted<R: Rng>(rng: &mut R, home: usize, classes: usize, signal: f64) -> usize {
    if classes == 1 || rng.random::<f64>() < signal {
        home
    } else {
        let other = rng.random_range(0..classes - 1);
        if other >= home {
            other + 1
        } else {
            other
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            z * scale
        })
        .collect()
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(PropertyGraph, FeatureTable)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut g = PropertyGraph::new();
    let none = Props::new;
    let (wa, ws, wg, wk) = (
        width(spec.num_artists),
        width(spec.num_styles),
        width(spec.num_genres),
        width(spec.artworks_per_artist),
    );

    let styles: Vec<NodeId> = (0..spec.num_styles)
        .map(|s| g.add_node(NodeLabel::Style, &format!("Style {s:0ws$}"), none()))
        .collect::<Result<_>>()?;
    let genres: Vec<NodeId> = (0..spec.num_genres)
        .map(|s| g.add_node(NodeLabel::Genre, &format!("Genre {s:0wg$}"), none()))
        .collect::<Result<_>>()?;
    let movements: Vec<NodeId> = (0..spec.num_movements())
        .map(|s| g.add_node(NodeLabel::Movement, &format!("Movement {s:0ws$}"), none()))
        .collect::<Result<_>>()?;

    let d = spec.visual_dim;
    let artist_protos: Vec<Vec<f64>> = (0..spec.num_artists).map(|_| gaussian(&mut rng, d, 1.0)).collect();

    let mut ids = Vec::new();
    let mut data = Vec::new();
    for a in 0..spec.num_artists {
        let artist = g.add_node(NodeLabel::Artist, &format!("Artist {a:0wa$}"), none())?;
        g.add_edge(artist, EdgeType::PartOfMovement, movements[spec.home_style(a)])?;
        for k in 0..spec.artworks_per_artist {
            let art = g.add_node(NodeLabel::Artwork, &format!("Work {a:0wa$}-{k:0wk$}"), none())?;
            let s = planted(&mut rng, spec.home_style(a), spec.num_styles, spec.context_signal);
            let gn = planted(&mut rng, spec.home_genre(a), spec.num_genres, spec.context_signal);
            g.add_edge(art, EdgeType::CreatedBy, artist)?;
            g.add_edge(art, EdgeType::HasStyle, styles[s])?;
            g.add_edge(art, EdgeType::HasGenre, genres[gn])?;
            let noise = gaussian(&mut rng, d, spec.visual_noise);
            ids.push(art);
            data.extend((0..d).map(|j| (artist_protos[a][j] + noise[j]) as f32));
        }
    }
    Ok((g, FeatureTable::new(d, ids, data)?))
}

/// Shape of the large graph used for latency measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaleSpec {
    pub artworks: usize,
    pub artists: usize,
    pub galleries: usize,
    pub cities: usize,
    pub countries: usize,
    pub styles: usize,
    pub genres: usize,
    pub tags: usize,
    pub media: usize,
    pub movements: usize,
    pub fields: usize,
    pub tags_per_artwork: usize,
    pub influences_per_artist: usize,
    pub seed: u64,
}

impl Default for ScaleSpec {
    fn default() -> Self {
        ScaleSpec {
            artworks: 63_000,
            artists: 8_000,
            galleries: 2_000,
            cities: 500,
            countries: 50,
            styles: 100,
            genres: 50,
            tags: 1_200,
            media: 50,
            movements: 100,
            fields: 30,
            tags_per_artwork: 2,
            influences_per_artist: 3,
            seed: 0,
        }
    }
}

/// A random graph with the label mix of a real art collection, about 75k
/// nodes and 540k edges at the default spec.
pub fn generate_scale_graph(spec: &ScaleSpec) -> Result<PropertyGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut g = PropertyGraph::new();
    let make = |g: &mut PropertyGraph, label: NodeLabel, n: usize| -> Result<Vec<NodeId>> {
        if n == 0 {
            return Err(Error::validation(format!("scale graph needs at least one {label}")));
        }
        (0..n)
            .map(|i| g.add_node(label, &format!("{label} {i}"), Props::new()))
            .collect()
    };
    let countries = make(&mut g, NodeLabel::Country, spec.countries)?;
    let cities = make(&mut g, NodeLabel::City, spec.cities)?;
    let galleries = make(&mut g, NodeLabel::Gallery, spec.galleries)?;
    let styles = make(&mut g, NodeLabel::Style, spec.styles)?;
    let genres = make(&mut g, NodeLabel::Genre, spec.genres)?;
    let tags = make(&mut g, NodeLabel::Tag, spec.tags)?;
    let media = make(&mut g, NodeLabel::Media, spec.media)?;
    let movements = make(&mut g, NodeLabel::Movement, spec.movements)?;
    let fields = make(&mut g, NodeLabel::Field, spec.fields)?;
    let artists = make(&mut g, NodeLabel::Artist, spec.artists)?;
    let artworks = make(&mut g, NodeLabel::Artwork, spec.artworks)?;

    let pick = |rng: &mut ChaCha8Rng, v: &[NodeId]| v[rng.random_range(0..v.len())];
    for &c in &cities {
        g.add_edge(c, EdgeType::InCountry, pick(&mut rng, &countries))?;
    }
    for &gal in &galleries {
        g.add_edge(gal, EdgeType::InCity, pick(&mut rng, &cities))?;
    }
    for (i, &a) in artists.iter().enumerate() {
        g.add_edge(a, EdgeType::PartOfMovement, pick(&mut rng, &movements))?;
        g.add_edge(a, EdgeType::HasField, pick(&mut rng, &fields))?;
        // influence flows from older (lower index) to newer artists, which
        // keeps the relation acyclic like a real chronology
        if i > 0 {
            for _ in 0..spec.influences_per_artist {
                let src = artists[rng.random_range(0..i)];
                g.add_edge(src, EdgeType::Influenced, a)?;
            }
        }
    }
    for &w in &artworks {
        g.add_edge(w, EdgeType::CreatedBy, pick(&mut rng, &artists))?;
        g.add_edge(w, EdgeType::HasStyle, pick(&mut rng, &styles))?;
        g.add_edge(w, EdgeType::HasGenre, pick(&mut rng, &genres))?;
        g.add_edge(w, EdgeType::MadeOfMedia, pick(&mut rng, &media))?;
        g.add_edge(w, EdgeType::LocatedInGallery, pick(&mut rng, &galleries))?;
        let completed = if rng.random_bool(0.5) {
            pick(&mut rng, &cities)
        } else {
            pick(&mut rng, &countries)
        };
        g.add_edge(w, EdgeType::CompletedIn, completed)?;
        for _ in 0..spec.tags_per_artwork {
            g.add_edge(w, EdgeType::HasTag, pick(&mut rng, &tags))?;
        }
    }
    Ok(g)
}
