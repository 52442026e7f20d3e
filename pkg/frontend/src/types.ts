// Wire types for the /api/v1 endpoints.

export interface SensorLive {
  sensor_id: string;
  at: string;
  temperature_c: number | null;
  humidity_pct: number | null;
  illuminance_lux: number | null;
  age_s?: number;
}

export interface AlertStateSummary {
  phase: "OK" | "PENDING" | "ALERTING" | "RECOVERING";
  severity: "WARNING" | "CRITICAL" | null;
  direction: "LOW" | "HIGH" | null;
  since: string | null;
}

export interface PlantLive {
  instance_id: string;
  species_id: string;
  sensor_id: string;
  display_name: string;
  added_at: string;
  alerts: Record<string, AlertStateSummary>;
}

export interface LiveSnapshot {
  at: string;
  sensors: SensorLive[];
  plants: PlantLive[];
}

export interface ThresholdBands {
  critical_low: number | null;
  low: number | null;
  high: number | null;
  critical_high: number | null;
}

export interface Species {
  species_id: string;
  name: string;
  description: string;
  temperature: ThresholdBands;
  humidity: ThresholdBands;
  illuminance: ThresholdBands;
}

export interface Plant {
  instance_id: string;
  species_id: string;
  sensor_id: string;
  display_name: string;
  added_at: string;
}

export type AlertKind = "RAISED" | "ESCALATED" | "REPEATED" | "RECOVERED";

export interface AlertEvent {
  instance_id: string;
  variable: string;
  kind: AlertKind;
  severity: "WARNING" | "CRITICAL";
  direction: "LOW" | "HIGH";
  value: number | null;
  bound: number;
  at: string;
}

export interface VariableBucketStats {
  count: number;
  mean: number | null;
  min: number | null;
  max: number | null;
}

export interface HistoryBucket {
  bucket_start: string;
  sample_count: number;
  temperature: VariableBucketStats;
  humidity: VariableBucketStats;
  illuminance: VariableBucketStats;
}

export interface HistoryResponse {
  sensor_id: string;
  buckets: HistoryBucket[];
}

export type Variable = "temperature" | "humidity" | "illuminance";

export const VARIABLES: Variable[] = ["temperature", "humidity", "illuminance"];

export const VARIABLE_UNITS: Record<Variable, string> = {
  temperature: "°C",
  humidity: "%RH",
  illuminance: "lux",
};
