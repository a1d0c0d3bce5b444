use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The closed set of node kinds in the art graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeLabel {
    Artist,
    Artwork,
    Tag,
    Genre,
    Style,
    Period,
    Series,
    Auction,
    Media,
    Gallery,
    City,
    Country,
    Field,
    Movement,
    Training,
    Category,
}

impl NodeLabel {
    pub const ALL: [NodeLabel; 16] = [
        NodeLabel::Artist,
        NodeLabel::Artwork,
        NodeLabel::Tag,
        NodeLabel::Genre,
        NodeLabel::Style,
        NodeLabel::Period,
        NodeLabel::Series,
        NodeLabel::Auction,
        NodeLabel::Media,
        NodeLabel::Gallery,
        NodeLabel::City,
        NodeLabel::Country,
        NodeLabel::Field,
        NodeLabel::Movement,
        NodeLabel::Training,
        NodeLabel::Category,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeLabel::Artist => "Artist",
            NodeLabel::Artwork => "Artwork",
            NodeLabel::Tag => "Tag",
            NodeLabel::Genre => "Genre",
            NodeLabel::Style => "Style",
            NodeLabel::Period => "Period",
            NodeLabel::Series => "Series",
            NodeLabel::Auction => "Auction",
            NodeLabel::Media => "Media",
            NodeLabel::Gallery => "Gallery",
            NodeLabel::City => "City",
            NodeLabel::Country => "Country",
            NodeLabel::Field => "Field",
            NodeLabel::Movement => "Movement",
            NodeLabel::Training => "Training",
            NodeLabel::Category => "Category",
        }
    }

    pub(crate) fn ordinal(self) -> usize {
        self as usize
    }

    pub(crate) fn from_ordinal(v: u8) -> Option<Self> {
        Self::ALL.get(v as usize).copied()
    }

    /// Property keys documented for this label. Other keys are kept but
    /// flagged by the loader.
    pub fn known_props(self) -> &'static [&'static str] {
        match self {
            NodeLabel::Artist => &[
                "biography",
                "birth_date",
                "death_date",
                "birth_place",
                "death_place",
                "nationality",
                "gender",
                "image_url",
                "wikipedia_url",
            ],
            NodeLabel::Artwork => &[
                "description",
                "completion_date",
                "image_url",
                "width",
                "height",
                "title",
            ],
            NodeLabel::Gallery | NodeLabel::City | NodeLabel::Country => {
                &["description", "url", "latitude", "longitude"]
            }
            _ => &["description", "url"],
        }
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NodeLabel::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown node label {s:?}"))
    }
}

/// Relationship types. Each one fixes the label of its source and the
/// admissible labels of its target; see [`EdgeType::endpoints`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EdgeType {
    // artwork-sourced
    CreatedBy,
    HasTag,
    HasGenre,
    HasStyle,
    InPeriod,
    PartOfSeries,
    SoldAtAuction,
    MadeOfMedia,
    LocatedInGallery,
    CompletedIn,
    // artist-sourced
    HasField,
    PartOfMovement,
    TrainedAt,
    HasCategory,
    Influenced,
    TaughtBy,
    PatronOf,
    // locations
    InCountry,
    InCity,
}

impl EdgeType {
    pub const ALL: [EdgeType; 19] = [
        EdgeType::CreatedBy,
        EdgeType::HasTag,
        EdgeType::HasGenre,
        EdgeType::HasStyle,
        EdgeType::InPeriod,
        EdgeType::PartOfSeries,
        EdgeType::SoldAtAuction,
        EdgeType::MadeOfMedia,
        EdgeType::LocatedInGallery,
        EdgeType::CompletedIn,
        EdgeType::HasField,
        EdgeType::PartOfMovement,
        EdgeType::TrainedAt,
        EdgeType::HasCategory,
        EdgeType::Influenced,
        EdgeType::TaughtBy,
        EdgeType::PatronOf,
        EdgeType::InCountry,
        EdgeType::InCity,
    ];

    /// Edge types that connect two artists.
    pub const ARTIST_TO_ARTIST: [EdgeType; 3] =
        [EdgeType::Influenced, EdgeType::TaughtBy, EdgeType::PatronOf];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeType::CreatedBy => "createdBy",
            EdgeType::HasTag => "hasTag",
            EdgeType::HasGenre => "hasGenre",
            EdgeType::HasStyle => "hasStyle",
            EdgeType::InPeriod => "inPeriod",
            EdgeType::PartOfSeries => "partOfSeries",
            EdgeType::SoldAtAuction => "soldAtAuction",
            EdgeType::MadeOfMedia => "madeOfMedia",
            EdgeType::LocatedInGallery => "locatedInGallery",
            EdgeType::CompletedIn => "completedIn",
            EdgeType::HasField => "hasField",
            EdgeType::PartOfMovement => "partOfMovement",
            EdgeType::TrainedAt => "trainedAt",
            EdgeType::HasCategory => "hasCategory",
            EdgeType::Influenced => "influenced",
            EdgeType::TaughtBy => "taughtBy",
            EdgeType::PatronOf => "patronOf",
            EdgeType::InCountry => "inCountry",
            EdgeType::InCity => "inCity",
        }
    }

    pub(crate) fn ordinal(self) -> usize {
        self as usize
    }

    pub(crate) fn from_ordinal(v: u8) -> Option<Self> {
        Self::ALL.get(v as usize).copied()
    }

    /// `(source label, admissible target labels)`.
    pub fn endpoints(self) -> (NodeLabel, &'static [NodeLabel]) {
        use NodeLabel as L;
        match self {
            EdgeType::CreatedBy => (L::Artwork, &[L::Artist]),
            EdgeType::HasTag => (L::Artwork, &[L::Tag]),
            EdgeType::HasGenre => (L::Artwork, &[L::Genre]),
            EdgeType::HasStyle => (L::Artwork, &[L::Style]),
            EdgeType::InPeriod => (L::Artwork, &[L::Period]),
            EdgeType::PartOfSeries => (L::Artwork, &[L::Series]),
            EdgeType::SoldAtAuction => (L::Artwork, &[L::Auction]),
            EdgeType::MadeOfMedia => (L::Artwork, &[L::Media]),
            EdgeType::LocatedInGallery => (L::Artwork, &[L::Gallery]),
            EdgeType::CompletedIn => (L::Artwork, &[L::City, L::Country]),
            EdgeType::HasField => (L::Artist, &[L::Field]),
            EdgeType::PartOfMovement => (L::Artist, &[L::Movement]),
            EdgeType::TrainedAt => (L::Artist, &[L::Training]),
            EdgeType::HasCategory => (L::Artist, &[L::Category]),
            EdgeType::Influenced | EdgeType::TaughtBy | EdgeType::PatronOf => {
                (L::Artist, &[L::Artist])
            }
            EdgeType::InCountry => (L::City, &[L::Country]),
            EdgeType::InCity => (L::Gallery, &[L::City]),
        }
    }

    pub fn permits(self, src: NodeLabel, dst: NodeLabel) -> bool {
        let (s, ds) = self.endpoints();
        s == src && ds.contains(&dst)
    }
}

impl fmt::Display for EdgeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EdgeType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EdgeType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown edge type {s:?}"))
    }
}
