//! Namespace IRIs and the handful of terms the toolkit refers to by name.

pub mod rdf {
    pub const NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    pub const TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const PROPERTY: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Property";
    pub const LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
}

pub mod rdfs {
    pub const NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
    pub const CLASS: &str = "http://www.w3.org/2000/01/rdf-schema#Class";
    pub const SUB_CLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
    pub const SUB_PROPERTY_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subPropertyOf";
    pub const DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
    pub const RANGE: &str = "http://www.w3.org/2000/01/rdf-schema#range";
    pub const LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
    pub const COMMENT: &str = "http://www.w3.org/2000/01/rdf-schema#comment";
    pub const IS_DEFINED_BY: &str = "http://www.w3.org/2000/01/rdf-schema#isDefinedBy";
    pub const LITERAL: &str = "http://www.w3.org/2000/01/rdf-schema#Literal";
}

pub mod owl {
    pub const NS: &str = "http://www.w3.org/2002/07/owl#";
    pub const CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
    pub const OBJECT_PROPERTY: &str = "http://www.w3.org/2002/07/owl#ObjectProperty";
    pub const DATATYPE_PROPERTY: &str = "http://www.w3.org/2002/07/owl#DatatypeProperty";
    pub const ANNOTATION_PROPERTY: &str = "http://www.w3.org/2002/07/owl#AnnotationProperty";
    pub const EQUIVALENT_CLASS: &str = "http://www.w3.org/2002/07/owl#equivalentClass";
    pub const INVERSE_OF: &str = "http://www.w3.org/2002/07/owl#inverseOf";
    pub const DISJOINT_WITH: &str = "http://www.w3.org/2002/07/owl#disjointWith";
    pub const ONTOLOGY: &str = "http://www.w3.org/2002/07/owl#Ontology";
}

pub mod xsd {
    pub const NS: &str = "http://www.w3.org/2001/XMLSchema#";
    pub const STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
    pub const INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
    pub const DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
    pub const DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
    pub const BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
    pub const DATE_TIME: &str = "http://www.w3.org/2001/XMLSchema#dateTime";
}

pub mod skos {
    pub const NS: &str = "http://www.w3.org/2004/02/skos/core#";
    pub const DEFINITION: &str = "http://www.w3.org/2004/02/skos/core#definition";
}

pub mod foaf {
    pub const NS: &str = "http://xmlns.com/foaf/0.1/";
    pub const DOCUMENT: &str = "http://xmlns.com/foaf/0.1/Document";
}

pub mod dcat {
    pub const NS: &str = "http://www.w3.org/ns/dcat#";
    pub const DATASET: &str = "http://www.w3.org/ns/dcat#Dataset";
}

pub mod mls {
    pub const NS: &str = "http://www.w3.org/ns/mls#";
    pub const TASK: &str = "http://www.w3.org/ns/mls#Task";
}

pub mod prov {
    pub const NS: &str = "http://www.w3.org/ns/prov#";
}

pub mod dqv {
    pub const NS: &str = "http://www.w3.org/ns/dqv#";
}

pub mod dcterms {
    pub const NS: &str = "http://purl.org/dc/terms/";
    pub const SOURCE: &str = "http://purl.org/dc/terms/source";
}

/// The proprietary bias vocabulary.
pub mod bias {
    pub const NS: &str = "https://bias-project.x/bias/";

    pub const BIAS: &str = "https://bias-project.x/bias/Bias";
    pub const APPLICATION: &str = "https://bias-project.x/bias/Application";
    pub const ML_TASK: &str = "https://bias-project.x/bias/MLTask";
    pub const HARM: &str = "https://bias-project.x/bias/Harm";
    pub const BIAS_MEASURE: &str = "https://bias-project.x/bias/BiasMeasure";
    pub const BIAS_EVALUATION: &str = "https://bias-project.x/bias/BiasEvaluation";

    pub const SYSTEMIC_BIAS: &str = "https://bias-project.x/bias/SystemicBias";
    pub const STATISTICAL_BIAS: &str = "https://bias-project.x/bias/StatisticalComputationalBias";
    pub const HUMAN_BIAS: &str = "https://bias-project.x/bias/HumanBias";
    pub const POPULARITY_BIAS: &str = "https://bias-project.x/bias/PopularityBias";
    pub const REPRESENTATION_BIAS: &str = "https://bias-project.x/bias/RepresentationBias";
    pub const DEMOGRAPHY_BIAS: &str = "https://bias-project.x/bias/DemographyBias";

    pub const GINI_IN_DEGREE: &str = "https://bias-project.x/bias/GiniInDegree";
    pub const POPULARITY_MEASURE_2: &str = "https://bias-project.x/bias/PopularityMeasure2";
    pub const POPULARITY_MEASURE_3: &str = "https://bias-project.x/bias/PopularityMeasure3";

    pub const RECOMMENDER_SYSTEM: &str = "https://bias-project.x/bias/RecommenderSystem";
    pub const ERASURE: &str = "https://bias-project.x/bias/Erasure";

    pub const IS_ASSOCIATED_WITH: &str = "https://bias-project.x/bias/isAssociatedWith";
    pub const HAS_BIAS_MEASURE: &str = "https://bias-project.x/bias/hasBiasMeasure";
    pub const IS_ALIGNED_WITH: &str = "https://bias-project.x/bias/isAlignedWith";
    pub const MEASURES: &str = "https://bias-project.x/bias/measures";
    pub const FORMALIZATION: &str = "https://bias-project.x/bias/formalization";

    pub const EVALUATES_BIAS: &str = "https://bias-project.x/bias/evaluatesBias";
    pub const USES_MEASURE: &str = "https://bias-project.x/bias/usesMeasure";
    pub const HAS_VALUE: &str = "https://bias-project.x/bias/hasValue";
    pub const ON_DATASET: &str = "https://bias-project.x/bias/onDataset";
    pub const FOR_TASK: &str = "https://bias-project.x/bias/forTask";
    pub const DOCUMENTED_IN: &str = "https://bias-project.x/bias/documentedIn";
    pub const IN_APPLICATION: &str = "https://bias-project.x/bias/inApplication";
    pub const EVALUATED_AT: &str = "https://bias-project.x/bias/evaluatedAt";
}
